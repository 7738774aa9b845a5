// run.hpp
// Batch execution of a decider over trace files, streaming verdict records,
// and the summary report over finished runs.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipval/core.hpp"

namespace lipval {

enum ExitCode : int {
    kExitDecided = 0,
    kExitBudgetReached = 2,
    kExitInputError = 3,
    kExitResourceError = 4,
};

struct RunManifest {
    std::filesystem::path model_path;
    std::vector<std::filesystem::path> trace_paths;
    DeciderKind decider = DeciderKind::probabilistic;
    ValidationConfig config;
    std::filesystem::path out;
    std::optional<std::int64_t> budget_ms;
    // Write every n-th verdict; the last verdict of each trace is always written.
    std::uint64_t record_every = 1;
    // When false, elapsed_ns is written as 0 so reruns are byte-identical.
    bool timing = true;

    void validate() const;
};

struct RunSummary {
    int exit_code = kExitDecided;
    std::size_t traces = 0;
    std::size_t consistent = 0;
    std::size_t decided = 0;
    std::uint64_t samples = 0;
    std::string message;
};

// Never throws for input/resource problems; they map onto exit codes.
RunSummary run(const RunManifest& manifest, std::ostream& log);

// Path of the metadata document written next to a verdict file.
std::filesystem::path meta_path(const std::filesystem::path& verdict_file);

struct ReportSummary {
    std::size_t configs = 0;
    std::size_t traces = 0;
};

// Writes final_verdicts.tsv, confidence_curve.tsv, samples_to_consistent.tsv
// and timing.tsv into out_dir. Throws InputError on unreadable or
// mixed-model inputs.
ReportSummary report(std::span<const std::filesystem::path> verdict_files,
                     const std::filesystem::path& out_dir, std::ostream& summary);

}  // namespace lipval
