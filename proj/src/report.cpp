#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lipval/io.hpp"
#include "lipval/run.hpp"

namespace lipval {
namespace {

struct ConfigRuns {
    std::string label;
    // trace id -> records in file order
    std::map<std::string, std::vector<VerdictRecord>> traces;
};

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(fmt::format("{}: cannot open for writing", p.string()));
    return out;
}

std::vector<std::uint64_t> curve_grid(const std::set<std::uint64_t>& ks) {
    if (ks.size() <= 400) return {ks.begin(), ks.end()};
    const double kmax = static_cast<double>(*ks.rbegin());
    std::set<std::uint64_t> grid;
    for (int j = 0; j <= 200; ++j) {
        const double k = std::pow(kmax, j / 200.0);
        grid.insert(static_cast<std::uint64_t>(std::llround(k)));
    }
    grid.insert(*ks.rbegin());
    return {grid.begin(), grid.end()};
}

// Confidence at sample count k: the latest record at or before k.
double gamma_at(const std::vector<VerdictRecord>& recs, std::uint64_t k) {
    auto it = std::upper_bound(recs.begin(), recs.end(), k,
                               [](std::uint64_t v, const VerdictRecord& r) { return v < r.k; });
    if (it == recs.begin()) return 0.0;
    return std::prev(it)->gamma;
}

}  // namespace

ReportSummary report(std::span<const std::filesystem::path> verdict_files,
                     const std::filesystem::path& out_dir, std::ostream& summary) {
    if (verdict_files.empty()) throw InputError("no verdict files given");

    std::vector<ConfigRuns> configs;
    std::optional<std::string> model_fp;
    std::set<std::string> labels;
    for (const auto& file : verdict_files) {
        const auto mp = meta_path(file);
        nlohmann::json meta;
        try {
            meta = nlohmann::json::parse(read_file(mp));
        } catch (const nlohmann::json::exception& e) {
            throw InputError(fmt::format("{}: {}", mp.string(), e.what()));
        }
        const std::string fp = meta.value("model_fingerprint", "");
        if (model_fp && *model_fp != fp)
            throw InputError(fmt::format("{}: verdicts come from a different model than {}",
                                         file.string(), verdict_files.front().string()));
        model_fp = fp;

        ConfigRuns cfg;
        const std::string decider = meta.value("decider", "?");
        cfg.label = decider == "prob" ? fmt::format("prob delta={}", meta.value("delta", 0.0))
                                      : decider;
        if (!labels.insert(cfg.label).second) {
            cfg.label += " [" + file.filename().string() + "]";
            labels.insert(cfg.label);
        }
        for (auto& r : read_verdicts(file)) cfg.traces[r.trace_id].push_back(std::move(r));
        for (auto& [id, recs] : cfg.traces)
            std::stable_sort(recs.begin(), recs.end(),
                             [](const auto& a, const auto& b) { return a.k < b.k; });
        configs.push_back(std::move(cfg));
    }

    std::filesystem::create_directories(out_dir);
    auto finals = open_out(out_dir / "final_verdicts.tsv");
    auto curve = open_out(out_dir / "confidence_curve.tsv");
    auto to_consistent = open_out(out_dir / "samples_to_consistent.tsv");
    auto timing = open_out(out_dir / "timing.tsv");
    finals << "config\ttrace_id\tphi\tgamma\tk\tmin_disc\n";
    curve << "config\tk\tmean_gamma\tstd_gamma\ttraces\n";
    to_consistent << "config\ttrace_id\tk\n";
    timing << "config\tsamples\tmin_ns\tmean_ns\tmax_ns\n";

    summary << fmt::format("{:<28} {:>7} {:>10} {:>12} {:>12} {:>16} {:>12}\n", "config",
                           "traces", "consistent", "inconsistent", "mean_gamma",
                           "mean_k_consistent", "mean_ns");

    ReportSummary rs;
    rs.configs = configs.size();
    for (const auto& cfg : configs) {
        std::vector<const std::vector<VerdictRecord>*> inconsistent;
        std::set<std::uint64_t> ks;
        double gamma_sum = 0.0;
        double k_consistent_sum = 0.0;
        std::size_t n_consistent = 0;
        double t_min = INFINITY, t_max = 0.0;
        std::uint64_t t_total = 0, t_samples = 0;

        for (const auto& [id, recs] : cfg.traces) {
            const VerdictRecord& last = recs.back();
            finals << fmt::format("{}\t{}\t{}\t{:.9g}\t{}\t{}\n", cfg.label, id,
                                  last.phi ? "true" : "false", last.gamma, last.k,
                                  std::isfinite(last.min_disc) ? fmt::format("{:.9g}", last.min_disc)
                                                               : std::string("nan"));
            if (last.phi) {
                ++n_consistent;
                k_consistent_sum += static_cast<double>(last.k);
                to_consistent << fmt::format("{}\t{}\t{}\n", cfg.label, id, last.k);
            } else {
                inconsistent.push_back(&recs);
                gamma_sum += last.gamma;
                for (const auto& r : recs) ks.insert(r.k);
            }
            std::uint64_t prev_k = 0, prev_ns = 0;
            for (const auto& r : recs) {
                if (r.k > prev_k && r.elapsed_ns > 0) {
                    const double per = static_cast<double>(r.elapsed_ns - std::min(prev_ns, r.elapsed_ns)) /
                                       static_cast<double>(r.k - prev_k);
                    t_min = std::min(t_min, per);
                    t_max = std::max(t_max, per);
                    t_total += r.elapsed_ns - std::min(prev_ns, r.elapsed_ns);
                    t_samples += r.k - prev_k;
                }
                prev_k = r.k;
                prev_ns = r.elapsed_ns;
            }
            ++rs.traces;
        }

        for (std::uint64_t k : curve_grid(ks)) {
            double sum = 0.0, sq = 0.0;
            for (const auto* recs : inconsistent) {
                const double g = gamma_at(*recs, k);
                sum += g;
                sq += g * g;
            }
            const double n = static_cast<double>(inconsistent.size());
            const double mean = sum / n;
            const double var = std::max(0.0, sq / n - mean * mean);
            curve << fmt::format("{}\t{}\t{:.9g}\t{:.9g}\t{}\n", cfg.label, k, mean,
                                 std::sqrt(var), inconsistent.size());
        }

        const double mean_ns =
            t_samples ? static_cast<double>(t_total) / static_cast<double>(t_samples) : NAN;
        if (t_samples)
            timing << fmt::format("{}\t{}\t{:.1f}\t{:.1f}\t{:.1f}\n", cfg.label, t_samples, t_min,
                                  mean_ns, t_max);
        else
            timing << fmt::format("{}\t0\tnan\tnan\tnan\n", cfg.label);

        const double mean_gamma =
            inconsistent.empty() ? NAN : gamma_sum / static_cast<double>(inconsistent.size());
        const double mean_k =
            n_consistent ? k_consistent_sum / static_cast<double>(n_consistent) : NAN;
        summary << fmt::format("{:<28} {:>7} {:>10} {:>12} {:>12.6f} {:>16.1f} {:>12.1f}\n",
                               cfg.label, cfg.traces.size(), n_consistent, inconsistent.size(),
                               mean_gamma, mean_k, mean_ns);
    }
    return rs;
}

}  // namespace lipval
