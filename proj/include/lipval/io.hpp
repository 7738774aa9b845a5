// io.hpp
// Line-oriented file formats: traces in, verdict records out.
//
//   trace line:   {"id": str, "u": [num...], "y": [num...], "t": num?}
//   verdict line: {"trace_id": str, "k": int, "phi": bool, "gamma": num,
//                  "min_disc": num|null, "elapsed_ns": int}
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lipval/core.hpp"

namespace lipval {

std::string format_trace(const Trace& trace);
Trace parse_trace(const std::string& line, const std::string& where);

// Throws InputError naming the file when it is missing, empty, or malformed.
std::vector<Trace> read_traces(const std::filesystem::path& path);
void write_traces(const std::filesystem::path& path, const std::vector<Trace>& traces);

struct VerdictRecord {
    std::string trace_id;
    std::uint64_t k = 0;
    bool phi = false;
    double gamma = 0.0;
    double min_disc = 0.0;  // +inf before the first sample; written as null
    std::uint64_t elapsed_ns = 0;
};

VerdictRecord make_record(const std::string& trace_id, const Verdict& v, std::uint64_t elapsed_ns);

// One line, newline-terminated. gamma carries 9 significant digits.
std::string format_verdict(const VerdictRecord& r);
VerdictRecord parse_verdict(const std::string& line, const std::string& where);

// Parses every complete line. A final line without its newline (left by a
// killed writer) is ignored; any other malformed line is an InputError.
std::vector<VerdictRecord> read_verdicts(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// FNV-1a over the bytes; used to tell models apart in run metadata.
std::uint64_t fingerprint(const std::string& bytes) noexcept;

}  // namespace lipval
