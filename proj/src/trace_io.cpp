#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lipval/io.hpp"

namespace lipval {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json parse_line(const std::string& line, const std::string& where) {
    try {
        json j = json::parse(line);
        if (!j.is_object()) throw InputError(fmt::format("{}: expected a JSON object", where));
        return j;
    } catch (const json::parse_error& e) {
        throw InputError(fmt::format("{}: {}", where, e.what()));
    }
}

std::vector<double> numbers(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array())
        throw InputError(fmt::format("{}: \"{}\" must be an array of numbers", where, key));
    std::vector<double> out;
    for (const auto& v : *it) {
        if (!v.is_number())
            throw InputError(fmt::format("{}: \"{}\" must be an array of numbers", where, key));
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(fmt::format("{}: cannot open file", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fingerprint(const std::string& bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string format_trace(const Trace& trace) {
    ordered_json j;
    j["id"] = trace.id;
    j["u"] = trace.input;
    j["y"] = trace.output;
    if (trace.time) j["t"] = *trace.time;
    return j.dump();
}

Trace parse_trace(const std::string& line, const std::string& where) {
    const json j = parse_line(line, where);
    Trace t;
    auto id = j.find("id");
    if (id == j.end()) throw InputError(fmt::format("{}: missing \"id\"", where));
    if (id->is_string())
        t.id = id->get<std::string>();
    else if (id->is_number_integer())
        t.id = std::to_string(id->get<long long>());
    else
        throw InputError(fmt::format("{}: \"id\" must be a string", where));
    t.input = numbers(j, "u", where);
    t.output = numbers(j, "y", where);
    if (auto tt = j.find("t"); tt != j.end() && !tt->is_null()) {
        if (!tt->is_number()) throw InputError(fmt::format("{}: \"t\" must be a number", where));
        t.time = tt->get<double>();
    }
    return t;
}

std::vector<Trace> read_traces(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::vector<Trace> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(parse_trace(line, fmt::format("{}:{}", path.string(), lineno)));
    }
    if (out.empty()) throw InputError(fmt::format("{}: trace file contains no traces", path.string()));
    return out;
}

void write_traces(const std::filesystem::path& path, const std::vector<Trace>& traces) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(fmt::format("{}: cannot open for writing", path.string()));
    for (const auto& t : traces) out << format_trace(t) << '\n';
    if (!out) throw InputError(fmt::format("{}: write failed", path.string()));
}

VerdictRecord make_record(const std::string& trace_id, const Verdict& v,
                          std::uint64_t elapsed_ns) {
    return {trace_id, v.samples_evaluated, v.consistent, v.confidence, v.min_discrepancy_seen,
            elapsed_ns};
}

std::string format_verdict(const VerdictRecord& r) {
    const std::string min_disc =
        std::isfinite(r.min_disc) ? fmt::format("{:.17g}", r.min_disc) : std::string("null");
    return fmt::format(
        "{{\"trace_id\":{},\"k\":{},\"phi\":{},\"gamma\":{:.9g},\"min_disc\":{},\"elapsed_ns\":{}}}\n",
        json(r.trace_id).dump(), r.k, r.phi ? "true" : "false", r.gamma, min_disc, r.elapsed_ns);
}

VerdictRecord parse_verdict(const std::string& line, const std::string& where) {
    const json j = parse_line(line, where);
    VerdictRecord r;
    try {
        r.trace_id = j.at("trace_id").get<std::string>();
        r.k = j.at("k").get<std::uint64_t>();
        r.phi = j.at("phi").get<bool>();
        r.gamma = j.at("gamma").get<double>();
        const json& md = j.at("min_disc");
        r.min_disc = md.is_null() ? std::numeric_limits<double>::infinity() : md.get<double>();
        r.elapsed_ns = j.at("elapsed_ns").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw InputError(fmt::format("{}: bad verdict record: {}", where, e.what()));
    }
    return r;
}

std::vector<VerdictRecord> read_verdicts(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::vector<VerdictRecord> out;
    std::size_t pos = 0;
    std::size_t lineno = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) break;  // unterminated tail
        ++lineno;
        const std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        out.push_back(parse_verdict(line, fmt::format("{}:{}", path.string(), lineno)));
    }
    return out;
}

}  // namespace lipval
