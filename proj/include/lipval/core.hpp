// core.hpp
// Domain types shared by every decider: parameter boxes, models, traces,
// configuration, verdicts, and the discrepancy norms.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lipval {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: dimensions, ranges, malformed files.
class InputError : public Error {
public:
    using Error::Error;
};

// The model failed to produce a finite output.
class EvaluationError : public Error {
public:
    using Error::Error;
};

// A computation would exceed its memory/work budget.
class ResourceError : public Error {
public:
    using Error::Error;
};

// Axis-aligned box X in R^n with lower[i] < upper[i].
class ParameterBox {
public:
    ParameterBox(std::vector<double> lower, std::vector<double> upper);

    std::size_t dim() const noexcept { return lower_.size(); }
    const std::vector<double>& lower() const noexcept { return lower_; }
    const std::vector<double>& upper() const noexcept { return upper_; }
    double width(std::size_t i) const noexcept { return upper_[i] - lower_[i]; }
    double max_width() const noexcept;
    bool contains(std::span<const double> x) const noexcept;

    static ParameterBox unit(std::size_t n);

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

// Writes G(x, u) into y. Must be callable concurrently.
using Generator =
    std::function<void(std::span<const double> x, std::span<const double> u, std::span<double> y)>;

// The tuple (X, U, Y, G, L). L is asserted by the user, never derived here.
struct ModelSpec {
    ParameterBox params;
    std::size_t input_dim = 0;
    std::size_t output_dim = 1;
    Generator generator;
    double lipschitz = 1.0;

    // L rescaled to the unit cube: L * max_i(upper_i - lower_i).
    double normalized_lipschitz() const noexcept { return lipschitz * params.max_width(); }

    void validate() const;
};

struct Trace {
    std::string id;
    std::vector<double> input;
    std::vector<double> output;
    std::optional<double> time;
};

// Throws InputError when the trace shape does not match the model.
void check_trace(const ModelSpec& model, const Trace& trace);

// Infinity norm, optionally dropping the `trim` largest entries first.
struct DiscrepancyNorm {
    std::size_t trim = 0;

    static DiscrepancyNorm infinity() { return {}; }
    static DiscrepancyNorm trimmed(std::size_t t) { return {t}; }

    // Reorders `residual`. Requires trim < residual.size().
    double apply(std::span<double> residual) const;
};

struct ValidationConfig {
    double epsilon = 0.005;
    double delta = 0.1;
    std::uint64_t max_samples = 100000;
    std::size_t bins = 1000;
    DiscrepancyNorm norm{};
    std::uint64_t seed = 0;
    double grid_slack = 0.01;
    double hoeffding_split = 0.5;

    // Throws InputError on any range violation.
    void validate() const;
    void validate_for(const ModelSpec& model) const;
};

enum class DeciderKind { naive, exact, probabilistic };

const char* to_string(DeciderKind kind) noexcept;
DeciderKind decider_from_string(const std::string& name);

struct Verdict {
    bool consistent = false;
    double confidence = 0.0;
    std::uint64_t samples_evaluated = 0;
    double min_discrepancy_seen = std::numeric_limits<double>::infinity();
    DeciderKind decider = DeciderKind::probabilistic;
};

// ||G(x, u) - y|| under `norm`. x must lie inside model.params.
double discrepancy(const ModelSpec& model, std::span<const double> x, const Trace& trace,
                   const DiscrepancyNorm& norm);

// Affine maps between the box and [0,1]^n. Results are clamped to the target
// range so rounding never produces an out-of-box point.
std::vector<double> normalize_params(const ParameterBox& box, std::span<const double> x);
std::vector<double> denormalize_params(const ParameterBox& box, std::span<const double> z);
void denormalize_into(const ParameterBox& box, std::span<const double> z, std::span<double> x);

// Reusable scratch for evaluating discrepancies in a hot loop.
class DiscrepancyEvaluator {
public:
    DiscrepancyEvaluator(const ModelSpec& model, const Trace& trace, DiscrepancyNorm norm);

    // Discrepancy at the normalized point z in [0,1]^n.
    double at_normalized(std::span<const double> z);
    double at(std::span<const double> x);

private:
    const ModelSpec& model_;
    const Trace& trace_;
    DiscrepancyNorm norm_;
    std::vector<double> x_;
    std::vector<double> y_;
};

}  // namespace lipval
