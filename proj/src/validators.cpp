#include "lipval/validators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace lipval {
namespace {

const ModelSpec& validated(const ModelSpec& model, const ValidationConfig& config) {
    model.validate();
    config.validate_for(model);
    return model;
}

}  // namespace

HoeffdingConstants hoeffding_constants(std::uint64_t samples, double delta, double split) {
    const double k = static_cast<double>(samples);
    const double hoeffding_risk = split * delta;
    HoeffdingConstants hc;
    hc.c = std::sqrt(std::log(2.0 / hoeffding_risk) / (2.0 * k));
    hc.a = (1.0 - hoeffding_risk) / (delta - hoeffding_risk);
    return hc;
}

double coverage_confidence(double mean_term, std::uint64_t samples, double delta, double split) {
    if (samples == 0) return 0.0;
    const HoeffdingConstants hc = hoeffding_constants(samples, delta, split);
    const double gamma = 1.0 - hc.a * (mean_term + hc.c);
    return std::clamp(gamma, 0.0, 1.0);
}

double unquantized_mean_term(std::span<const double> rhat) {
    if (rhat.empty()) return 1.0;
    const double k = static_cast<double>(rhat.size());
    double sigma = 0.0;
    for (double r : rhat) sigma += std::exp(k * std::log1p(-r));
    return sigma / k;
}

CoverageBins::CoverageBins(std::size_t bins)
    : counts_(bins, 0), min_discrepancy_(std::numeric_limits<double>::infinity()) {
    if (bins < 1) throw InputError("coverage histogram needs at least one bin");
}

std::size_t CoverageBins::index_of(double rhat) const noexcept {
    const double d = static_cast<double>(counts_.size());
    const double scaled = std::floor(d * std::clamp(rhat, 0.0, 1.0));
    return std::min(static_cast<std::size_t>(scaled), counts_.size() - 1);
}

void CoverageBins::add(double rhat, double discrepancy) {
    const std::size_t b = index_of(rhat);
    if (counts_[b]++ == 0) {
        const double q = static_cast<double>(b) / static_cast<double>(counts_.size());
        live_.push_back({std::log1p(-q), b});
    }
    ++samples_;
    min_discrepancy_ = std::min(min_discrepancy_, discrepancy);
}

double CoverageBins::mean_term() {
    if (samples_ == 0) return 1.0;
    const double k = static_cast<double>(samples_);
    double sigma = 0.0;
    std::size_t keep = 0;
    for (std::size_t i = 0; i < live_.size(); ++i) {
        const LiveBin lb = live_[i];
        const double term = std::exp(k * lb.log_q);
        if (term == 0.0) continue;
        sigma += static_cast<double>(counts_[lb.bin]) * term;
        live_[keep++] = lb;
    }
    live_.resize(keep);
    return sigma / k;
}

Validator::Validator(ModelSpec model, Trace trace, ValidationConfig config, DeciderKind kind)
    : model_(std::move(model)),
      trace_(std::move(trace)),
      config_(config),
      evaluator_(validated(model_, config_), trace_, config_.norm),
      sampler_(config_.seed) {
    verdict_.decider = kind;
}

const Verdict& Validator::step() {
    sample();
    return refresh();
}

void Validator::sample() {
    if (finished_) throw InputError("validator already finished");
    advance();
}

const Verdict& Validator::refresh() {
    if (!verdict_.consistent) update_confidence();
    return verdict_;
}

bool Validator::record_sample(double discrepancy) {
    ++verdict_.samples_evaluated;
    verdict_.min_discrepancy_seen = std::min(verdict_.min_discrepancy_seen, discrepancy);
    if (discrepancy <= config_.epsilon) {
        verdict_.consistent = true;
        verdict_.confidence = 1.0;
        finished_ = true;
        return true;
    }
    if (verdict_.samples_evaluated >= config_.max_samples) finished_ = true;
    return false;
}

// ---------------------------------------------------------------------------

NaiveValidator::NaiveValidator(ModelSpec model, Trace trace, ValidationConfig config)
    : Validator(std::move(model), std::move(trace), config, DeciderKind::naive),
      x_(model_.params.dim()) {
    const double spacing = 2.0 * config_.grid_slack / model_.lipschitz;
    for (std::size_t i = 0; i < model_.params.dim(); ++i) {
        const double cells = std::ceil(model_.params.width(i) / spacing);
        const std::uint64_t count = cells < 1.0 ? 1 : static_cast<std::uint64_t>(
            std::min(cells, static_cast<double>(kMaxGridPoints) + 1.0));
        if (count > kMaxGridPoints || grid_size_ > kMaxGridPoints / count)
            throw ResourceError(fmt::format(
                "naive grid exceeds {} points; increase alpha or use another decider",
                kMaxGridPoints));
        per_axis_.push_back(count);
        grid_size_ *= count;
    }
}

std::uint64_t NaiveValidator::draw_index() {
    // Sparse Fisher-Yates: position k swaps with a uniform j in [k, N).
    const std::uint64_t k = verdict_.samples_evaluated;
    const std::uint64_t j = k + sampler_.below(grid_size_ - k);
    auto value_at = [&](std::uint64_t pos) {
        auto it = swapped_.find(pos);
        return it == swapped_.end() ? pos : it->second;
    };
    const std::uint64_t picked = value_at(j);
    if (j != k) swapped_[j] = value_at(k);
    swapped_.erase(k);
    return picked;
}

void NaiveValidator::advance() {
    std::uint64_t flat = draw_index();
    // Cell-centred point, so every x is within alpha/L of one.
    for (std::size_t i = model_.params.dim(); i-- > 0;) {
        const std::uint64_t j = flat % per_axis_[i];
        flat /= per_axis_[i];
        const double frac = (static_cast<double>(j) + 0.5) / static_cast<double>(per_axis_[i]);
        x_[i] = std::clamp(model_.params.lower()[i] + frac * model_.params.width(i),
                           model_.params.lower()[i], model_.params.upper()[i]);
    }
    const double disc = evaluator_.at(x_);
    if (record_sample(disc)) return;
    if (disc > config_.epsilon + config_.grid_slack) ++eliminated_;
    verdict_.confidence = static_cast<double>(eliminated_) / static_cast<double>(grid_size_);
    if (verdict_.samples_evaluated >= grid_size_) finished_ = true;
}

// ---------------------------------------------------------------------------

ExactValidator::ExactValidator(ModelSpec model, Trace trace, ValidationConfig config,
                               std::size_t cell_budget)
    : Validator(std::move(model), std::move(trace), config, DeciderKind::exact),
      cell_budget_(cell_budget),
      z_(model_.params.dim()) {}

void ExactValidator::advance() {
    sampler_.fill_unit(z_);
    const double disc = evaluator_.at_normalized(z_);
    if (record_sample(disc)) return;
    const double r = elimination_radius(disc, config_.epsilon, model_.normalized_lipschitz());
    boxes_.push_back(make_elimination_box(z_, r));
}

void ExactValidator::update_confidence() {
    verdict_.confidence = union_measure(boxes_, cell_budget_);
}

// ---------------------------------------------------------------------------

ProbabilisticValidator::ProbabilisticValidator(ModelSpec model, Trace trace,
                                               ValidationConfig config, bool retain_rhat)
    : Validator(std::move(model), std::move(trace), config, DeciderKind::probabilistic),
      bins_(config_.bins),
      retain_(retain_rhat),
      z_(model_.params.dim()) {}

void ProbabilisticValidator::advance() {
    sampler_.fill_unit(z_);
    const double disc = evaluator_.at_normalized(z_);
    if (record_sample(disc)) return;
    const double r = elimination_radius(disc, config_.epsilon, model_.normalized_lipschitz());
    const double rhat = reciprocal_lower_bound(z_, r);
    bins_.add(rhat, disc);
    if (retain_) rhat_.push_back(rhat);
}

void ProbabilisticValidator::update_confidence() {
    verdict_.confidence = coverage_confidence(bins_.mean_term(), bins_.samples(), config_.delta,
                                              config_.hoeffding_split);
}

double ProbabilisticValidator::unquantized_confidence() const {
    if (!retain_) throw InputError("reciprocal bounds were not retained");
    return coverage_confidence(unquantized_mean_term(rhat_), rhat_.size(), config_.delta,
                               config_.hoeffding_split);
}

// ---------------------------------------------------------------------------

std::unique_ptr<Validator> make_validator(DeciderKind kind, const ModelSpec& model,
                                          const Trace& trace, const ValidationConfig& config) {
    switch (kind) {
        case DeciderKind::naive: return std::make_unique<NaiveValidator>(model, trace, config);
        case DeciderKind::exact: return std::make_unique<ExactValidator>(model, trace, config);
        case DeciderKind::probabilistic:
            return std::make_unique<ProbabilisticValidator>(model, trace, config);
    }
    throw InputError("unknown decider");
}

Verdict run_validator(Validator& validator, const std::function<bool(const Verdict&)>& sink) {
    while (!validator.finished()) {
        const Verdict& v = validator.step();
        if (sink && !sink(v)) break;
    }
    return validator.current();
}

}  // namespace lipval
