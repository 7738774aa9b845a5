// lipval: validate observed traces against a Lipschitz-continuous model.
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lipval/io.hpp"
#include "lipval/monitor.hpp"
#include "lipval/mountain_car_traces.hpp"
#include "lipval/run.hpp"

namespace {

using namespace lipval;

int run_monitor(const std::filesystem::path& verdicts, const std::filesystem::path& traces,
                double window, double threshold) {
    std::map<std::string, double> times;
    for (const auto& t : read_traces(traces)) {
        if (!t.time) throw InputError(fmt::format("{}: trace '{}' has no \"t\"", traces.string(), t.id));
        times[t.id] = *t.time;
    }
    // Final verdict per trace, in trace-file order of first appearance.
    std::map<std::string, bool> final_phi;
    std::vector<std::string> order;
    for (const auto& r : read_verdicts(verdicts)) {
        if (!final_phi.count(r.trace_id)) order.push_back(r.trace_id);
        final_phi[r.trace_id] = r.phi;
    }
    std::vector<Decision> decisions;
    for (const auto& id : order) {
        auto it = times.find(id);
        if (it == times.end())
            throw InputError(fmt::format("{}: no timestamp for trace '{}'", traces.string(), id));
        decisions.push_back({it->second, final_phi[id]});
    }
    std::cout << "time\tevent\tinconsistent_fraction\n";
    for (const auto& a : monitor_decisions(decisions, window, threshold))
        std::cout << fmt::format("{}\t{}\t{:.6f}\n", a.time, a.raised ? "alarm" : "clear",
                                 a.inconsistent_fraction);
    return kExitDecided;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampling-based runtime validation of Lipschitz-continuous models"};
    app.require_subcommand(1);

    // run
    RunManifest manifest;
    std::string decider = "prob";
    std::string norm = "inf";
    std::int64_t budget_ms = -1;
    bool no_timing = false;
    auto* run_cmd = app.add_subcommand("run", "Validate traces against a model");
    run_cmd->add_option("--model", manifest.model_path, "Model JSON document")->required();
    run_cmd->add_option("--traces", manifest.trace_paths, "Trace file(s), one JSON object per line")
        ->required();
    run_cmd->add_option("--decider", decider, "naive | exact | prob")
        ->check(CLI::IsMember({"naive", "exact", "prob"}))
        ->capture_default_str();
    run_cmd->add_option("--epsilon", manifest.config.epsilon, "Acceptable error")->capture_default_str();
    run_cmd->add_option("--delta", manifest.config.delta, "Overconfidence risk")->capture_default_str();
    run_cmd->add_option("--max-samples", manifest.config.max_samples, "Sample budget per trace")
        ->capture_default_str();
    run_cmd->add_option("--bins", manifest.config.bins, "Quantization size D")->capture_default_str();
    run_cmd->add_option("--alpha", manifest.config.grid_slack, "Grid slack (naive decider)")
        ->capture_default_str();
    run_cmd->add_option("--beta", manifest.config.hoeffding_split,
                        "Share of delta given to the Hoeffding term")
        ->capture_default_str();
    run_cmd->add_option("--norm", norm, "inf | trimmed")
        ->check(CLI::IsMember({"inf", "trimmed"}))
        ->capture_default_str();
    run_cmd->add_option("--trim", manifest.config.norm.trim, "Largest residuals dropped (trimmed norm)")
        ->capture_default_str();
    run_cmd->add_option("--seed", manifest.config.seed, "RNG seed")->capture_default_str();
    run_cmd->add_option("--budget-ms", budget_ms, "Wall-clock budget for the whole run");
    run_cmd->add_option("--out", manifest.out, "Verdict output file")->required();
    run_cmd->add_option("--record-every", manifest.record_every,
                        "Write every n-th verdict (the last is always written)")
        ->capture_default_str();
    run_cmd->add_flag("--no-timing", no_timing, "Write elapsed_ns as 0 for byte-identical reruns");

    // generate-mc
    TraceGenOptions gen;
    std::string noise_mode = "divergent";
    double dt = -1.0;
    std::filesystem::path gen_out;
    auto* gen_cmd = app.add_subcommand("generate-mc", "Generate mountain-car traces");
    gen_cmd->add_option("--count", gen.count)->capture_default_str();
    gen_cmd->add_option("--noise-fraction", gen.noise_fraction)->capture_default_str();
    gen_cmd->add_option("--noise-scale", gen.noise_scale)->capture_default_str();
    gen_cmd->add_option("--noise-mode", noise_mode, "divergent | uniform")
        ->check(CLI::IsMember({"divergent", "uniform"}))
        ->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
    gen_cmd->add_option("--dt", dt, "Timestamp spacing in seconds (omit for no timestamps)");
    gen_cmd->add_option("--out", gen_out)->required();

    // report
    std::vector<std::filesystem::path> report_inputs;
    std::filesystem::path report_dir = "report";
    auto* rep_cmd = app.add_subcommand("report", "Summarize verdict files into plot-ready tables");
    rep_cmd->add_option("verdicts", report_inputs, "Verdict files")->required();
    rep_cmd->add_option("--out-dir", report_dir)->capture_default_str();

    // monitor
    std::filesystem::path mon_verdicts, mon_traces;
    double window = 1.0;
    double threshold = 2.0 / 3.0;
    auto* mon_cmd = app.add_subcommand("monitor", "Sliding-window alarm over final verdicts");
    mon_cmd->add_option("--verdicts", mon_verdicts)->required();
    mon_cmd->add_option("--traces", mon_traces, "Trace file providing timestamps")->required();
    mon_cmd->add_option("--window", window, "Window length in seconds")->capture_default_str();
    mon_cmd->add_option("--threshold", threshold, "Alarm above this inconsistent fraction")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInputError;
    }

    try {
        if (*run_cmd) {
            manifest.decider = decider_from_string(decider);
            if (norm == "inf" && manifest.config.norm.trim != 0)
                throw InputError("--trim requires --norm trimmed");
            if (budget_ms >= 0) manifest.budget_ms = budget_ms;
            manifest.timing = !no_timing;
            const RunSummary s = run(manifest, std::cerr);
            std::cerr << s.message << '\n';
            return s.exit_code;
        }
        if (*gen_cmd) {
            gen.mode = noise_mode_from_string(noise_mode);
            if (dt >= 0.0) gen.dt = dt;
            const auto generated = generate_mountain_car_traces(gen);
            std::vector<Trace> traces;
            std::size_t noisy = 0;
            for (const auto& g : generated) {
                traces.push_back(g.trace);
                noisy += g.noisy;
            }
            write_traces(gen_out, traces);
            std::cerr << fmt::format("wrote {} traces ({} noisy) to {}\n", traces.size(), noisy,
                                     gen_out.string());
            return kExitDecided;
        }
        if (*rep_cmd) {
            report(report_inputs, report_dir, std::cout);
            return kExitDecided;
        }
        if (*mon_cmd) return run_monitor(mon_verdicts, mon_traces, window, threshold);
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << '\n';
        return kExitResourceError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    }
    return kExitDecided;
}
