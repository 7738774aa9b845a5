#include "lipval/run.hpp"

#include <chrono>
#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lipval/io.hpp"
#include "lipval/models.hpp"
#include "lipval/rng.hpp"
#include "lipval/validators.hpp"

namespace lipval {
namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t nanos_since(Clock::time_point start) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count());
}

nlohmann::ordered_json run_metadata(const RunManifest& m, std::uint64_t model_fp) {
    nlohmann::ordered_json j;
    j["model"] = m.model_path.string();
    j["model_fingerprint"] = fmt::format("{:016x}", model_fp);
    std::vector<std::string> traces;
    for (const auto& p : m.trace_paths) traces.push_back(p.string());
    j["traces"] = traces;
    j["decider"] = to_string(m.decider);
    j["epsilon"] = m.config.epsilon;
    j["delta"] = m.config.delta;
    j["max_samples"] = m.config.max_samples;
    j["bins"] = m.config.bins;
    j["alpha"] = m.config.grid_slack;
    j["beta"] = m.config.hoeffding_split;
    j["norm"] = m.config.norm.trim == 0 ? "inf" : "trimmed";
    j["trim"] = m.config.norm.trim;
    j["seed"] = m.config.seed;
    if (m.budget_ms)
        j["budget_ms"] = *m.budget_ms;
    else
        j["budget_ms"] = nullptr;
    j["record_every"] = m.record_every;
    j["timing"] = m.timing;
    return j;
}

void write_meta(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(fmt::format("{}: cannot open for writing", path.string()));
    out << j.dump(2) << '\n';
}

}  // namespace

std::filesystem::path meta_path(const std::filesystem::path& verdict_file) {
    return std::filesystem::path(verdict_file.string() + ".meta.json");
}

void RunManifest::validate() const {
    if (model_path.empty()) throw InputError("no model file given");
    if (trace_paths.empty()) throw InputError("no trace file given");
    if (out.empty()) throw InputError("no output path given");
    if (record_every < 1) throw InputError("record interval must be at least 1");
    if (budget_ms && *budget_ms < 0) throw InputError("budget must be non-negative");
    config.validate();
}

RunSummary run(const RunManifest& m, std::ostream& log) {
    RunSummary summary;
    const auto start = Clock::now();
    try {
        m.validate();
        const std::string model_text = read_file(m.model_path);
        const LoadedModel loaded = parse_model_document(model_text, m.model_path.string());
        const ModelSpec& model = loaded.spec;
        if (loaded.network) {
            const double bound = loaded.network->lipschitz_upper_bound();
            if (model.lipschitz < bound)
                log << fmt::format(
                    "warning: declared Lipschitz constant {} is below the operator-norm bound {}; "
                    "the bound is conservative, but check the declared value\n",
                    model.lipschitz, bound);
        }
        m.config.validate_for(model);

        std::vector<Trace> traces;
        for (const auto& p : m.trace_paths) {
            for (auto& t : read_traces(p)) {
                try {
                    check_trace(model, t);
                } catch (const InputError& e) {
                    throw InputError(fmt::format("{}: {}", p.string(), e.what()));
                }
                traces.push_back(std::move(t));
            }
        }
        summary.traces = traces.size();

        auto meta = run_metadata(m, fingerprint(model_text));
        meta["status"] = "running";
        write_meta(meta_path(m.out), meta);

        std::ofstream out(m.out, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError(fmt::format("{}: cannot open for writing", m.out.string()));

        const std::optional<Clock::time_point> deadline =
            m.budget_ms ? std::optional(start + std::chrono::milliseconds(*m.budget_ms))
                        : std::nullopt;
        bool budget_hit = false;
        auto emit = [&](const Trace& t, const Verdict& v, std::uint64_t elapsed) {
            const std::string line = format_verdict(make_record(t.id, v, m.timing ? elapsed : 0));
            out.write(line.data(), static_cast<std::streamsize>(line.size()));
        };

        for (std::size_t i = 0; i < traces.size(); ++i) {
            const Trace& trace = traces[i];
            ValidationConfig cfg = m.config;
            cfg.seed = derive_seed(m.config.seed, i);
            auto validator = make_validator(m.decider, model, trace, cfg);

            const auto t0 = Clock::now();
            std::uint64_t elapsed = 0;
            bool written = false;
            while (!validator->finished()) {
                if (deadline && Clock::now() >= *deadline) {
                    budget_hit = true;
                    break;
                }
                validator->sample();
                const std::uint64_t k = validator->current().samples_evaluated;
                written = k % m.record_every == 0 || validator->finished();
                if (written) {
                    const Verdict& v = validator->refresh();
                    elapsed = nanos_since(t0);
                    emit(trace, v, elapsed);
                }
            }
            if (!written) emit(trace, validator->refresh(), nanos_since(t0));

            const Verdict& last = validator->current();
            summary.samples += last.samples_evaluated;
            if (validator->finished()) ++summary.decided;
            if (last.consistent) ++summary.consistent;
        }
        out.flush();
        if (!out) throw InputError(fmt::format("{}: write failed", m.out.string()));

        meta["status"] = budget_hit ? "budget" : "complete";
        meta["samples_total"] = summary.samples;
        meta["elapsed_ns_total"] = m.timing ? nanos_since(start) : 0;
        write_meta(meta_path(m.out), meta);

        summary.exit_code = budget_hit ? kExitBudgetReached : kExitDecided;
        summary.message = fmt::format("{} traces, {} consistent, {} decided, {} samples{}",
                                      summary.traces, summary.consistent, summary.decided,
                                      summary.samples, budget_hit ? " (budget reached)" : "");
    } catch (const ResourceError& e) {
        summary.exit_code = kExitResourceError;
        summary.message = fmt::format("resource error: {}", e.what());
    } catch (const Error& e) {
        summary.exit_code = kExitInputError;
        summary.message = fmt::format("error: {}", e.what());
    }
    return summary;
}

}  // namespace lipval
