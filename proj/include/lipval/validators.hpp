// validators.hpp
// The three deciders: naive grid, exact coverage, probabilistic coverage.
//
// Each decider is a stepper. step() evaluates exactly one parameter sample
// and returns the updated Verdict, so callers can stop at any time and keep
// the latest verdict (anytime contract). A decider is finished once it has
// found a consistent sample or spent its sample budget.
//
// sample() evaluates without recomputing the confidence; refresh() brings it
// up to date. Callers that only read every n-th verdict use the pair to skip
// the per-sample confidence pass.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "lipval/core.hpp"
#include "lipval/geometry.hpp"
#include "lipval/rng.hpp"

namespace lipval {

// Constants for the probabilistic bound. The risk budget delta is split:
// split*delta goes to the Hoeffding deviation event, the remainder to the
// Markov step.
struct HoeffdingConstants {
    double c = 0.0;  // satisfies 2 exp(-2 K c^2) = split * delta
    double a = 0.0;  // (1 - split*delta) / (delta - split*delta)
};

HoeffdingConstants hoeffding_constants(std::uint64_t samples, double delta, double split);

// 1 - a (mean_term + c), clamped to [0, 1].
double coverage_confidence(double mean_term, std::uint64_t samples, double delta, double split);

// (1/K) sum_k (1 - rhat_k)^K over retained, unquantized values.
double unquantized_mean_term(std::span<const double> rhat);

// Histogram of quantized reciprocal bounds. Bin b holds samples with
// floor(D * rhat) == b (clamped to D-1) and contributes (1 - b/D)^K each.
class CoverageBins {
public:
    explicit CoverageBins(std::size_t bins);

    std::size_t bins() const noexcept { return counts_.size(); }
    std::size_t index_of(double rhat) const noexcept;
    void add(double rhat, double discrepancy);

    // (1/K) sum_b count_b (1 - b/D)^K at the current K. Bins whose term has
    // underflowed to zero are dropped; K only grows, so they stay zero.
    double mean_term();

    std::uint64_t samples() const noexcept { return samples_; }
    double min_discrepancy() const noexcept { return min_discrepancy_; }
    std::span<const std::uint64_t> counts() const noexcept { return counts_; }

private:
    struct LiveBin {
        double log_q;  // log(1 - b/D)
        std::size_t bin;
    };

    std::vector<std::uint64_t> counts_;
    std::vector<LiveBin> live_;
    std::uint64_t samples_ = 0;
    double min_discrepancy_;
};

class Validator {
public:
    virtual ~Validator() = default;
    Validator(const Validator&) = delete;
    Validator& operator=(const Validator&) = delete;

    const Verdict& current() const noexcept { return verdict_; }
    bool finished() const noexcept { return finished_; }

    // Evaluates one sample. Must not be called once finished().
    const Verdict& step();
    void sample();
    const Verdict& refresh();

    DeciderKind kind() const noexcept { return verdict_.decider; }

protected:
    Validator(ModelSpec model, Trace trace, ValidationConfig config, DeciderKind kind);

    // Evaluate one sample; set finished_ when done.
    virtual void advance() = 0;
    // Recompute verdict_.confidence from the samples so far.
    virtual void update_confidence() {}

    // Shared tail of every step: consistent samples end the run.
    bool record_sample(double discrepancy);

    ModelSpec model_;
    Trace trace_;
    ValidationConfig config_;
    DiscrepancyEvaluator evaluator_;
    UniformSampler sampler_;
    Verdict verdict_;
    bool finished_ = false;
};

// Uniform grid with spacing alpha/L, sampled without replacement.
class NaiveValidator final : public Validator {
public:
    static constexpr std::uint64_t kMaxGridPoints = std::uint64_t{1} << 50;

    NaiveValidator(ModelSpec model, Trace trace, ValidationConfig config);

    std::uint64_t grid_size() const noexcept { return grid_size_; }
    const std::vector<std::uint64_t>& points_per_axis() const noexcept { return per_axis_; }

protected:
    void advance() override;

private:
    std::uint64_t draw_index();

    std::vector<std::uint64_t> per_axis_;
    std::uint64_t grid_size_ = 1;
    std::uint64_t eliminated_ = 0;  // evaluated points with discrepancy > eps + alpha
    std::unordered_map<std::uint64_t, std::uint64_t> swapped_;
    std::vector<double> x_;
};

// Random sampling; confidence is the exact measure of the union of the
// elimination neighborhoods seen so far.
class ExactValidator final : public Validator {
public:
    ExactValidator(ModelSpec model, Trace trace, ValidationConfig config,
                   std::size_t cell_budget = kDefaultCellBudget);

    const std::vector<EliminationBox>& boxes() const noexcept { return boxes_; }

protected:
    void advance() override;
    void update_confidence() override;

private:
    std::size_t cell_budget_;
    std::vector<EliminationBox> boxes_;
    std::vector<double> z_;
};

// Random sampling with replacement; confidence is the quantized
// Hoeffding/Markov lower bound on coverage.
class ProbabilisticValidator final : public Validator {
public:
    // retain_rhat keeps every unquantized reciprocal bound (O(K) memory) so
    // the quantization can be checked against the exact mean term.
    ProbabilisticValidator(ModelSpec model, Trace trace, ValidationConfig config,
                           bool retain_rhat = false);

    const CoverageBins& bins() const noexcept { return bins_; }
    std::span<const double> retained_rhat() const noexcept { return rhat_; }
    // Confidence from the retained values; requires retain_rhat.
    double unquantized_confidence() const;

protected:
    void advance() override;
    void update_confidence() override;

private:
    CoverageBins bins_;
    bool retain_;
    std::vector<double> rhat_;
    std::vector<double> z_;
};

std::unique_ptr<Validator> make_validator(DeciderKind kind, const ModelSpec& model,
                                          const Trace& trace, const ValidationConfig& config);

// Steps until finished or the sink returns false. Returns the last verdict.
Verdict run_validator(Validator& validator,
                      const std::function<bool(const Verdict&)>& sink = nullptr);

}  // namespace lipval
