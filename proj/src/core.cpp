#include "lipval/core.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace lipval {

ParameterBox::ParameterBox(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty()) throw InputError("parameter box must have at least one dimension");
    if (lower_.size() != upper_.size())
        throw InputError(fmt::format("parameter box bounds differ in length ({} vs {})",
                                     lower_.size(), upper_.size()));
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i]))
            throw InputError(fmt::format("parameter box dimension {} is empty: [{}, {}]", i,
                                         lower_[i], upper_[i]));
    }
}

double ParameterBox::max_width() const noexcept {
    double w = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) w = std::max(w, width(i));
    return w;
}

bool ParameterBox::contains(std::span<const double> x) const noexcept {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i)
        if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) return false;
    return true;
}

ParameterBox ParameterBox::unit(std::size_t n) {
    return ParameterBox(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0));
}

void ModelSpec::validate() const {
    if (output_dim < 1) throw InputError("model output dimension must be at least 1");
    if (!(lipschitz > 0.0) || !std::isfinite(lipschitz))
        throw InputError(fmt::format("Lipschitz constant must be positive, got {}", lipschitz));
    if (!generator) throw InputError("model has no generator");
}

void check_trace(const ModelSpec& model, const Trace& trace) {
    if (trace.input.size() != model.input_dim)
        throw InputError(fmt::format("trace '{}': input has {} entries, model expects {}",
                                     trace.id, trace.input.size(), model.input_dim));
    if (trace.output.size() != model.output_dim)
        throw InputError(fmt::format("trace '{}': output has {} entries, model expects {}",
                                     trace.id, trace.output.size(), model.output_dim));
}

double DiscrepancyNorm::apply(std::span<double> residual) const {
    if (trim >= residual.size())
        throw InputError(fmt::format("trimmed norm drops {} of {} entries", trim, residual.size()));
    for (double& r : residual) r = std::fabs(r);
    if (trim == 0) return *std::max_element(residual.begin(), residual.end());
    // (trim+1)-th largest element.
    auto nth = residual.begin() + static_cast<std::ptrdiff_t>(trim);
    std::nth_element(residual.begin(), nth, residual.end(), std::greater<>());
    return *nth;
}

void ValidationConfig::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InputError(fmt::format("epsilon must be positive, got {}", epsilon));
    if (!(delta > 0.0 && delta < 1.0))
        throw InputError(fmt::format("delta must lie in (0,1), got {}", delta));
    if (max_samples < 1) throw InputError("max_samples must be at least 1");
    if (bins < 1) throw InputError("bins must be at least 1");
    if (!(grid_slack > 0.0) || !std::isfinite(grid_slack))
        throw InputError(fmt::format("grid slack alpha must be positive, got {}", grid_slack));
    if (!(hoeffding_split > 0.0 && hoeffding_split < 1.0))
        throw InputError(fmt::format("hoeffding split beta must lie in (0,1), got {}",
                                     hoeffding_split));
}

void ValidationConfig::validate_for(const ModelSpec& model) const {
    validate();
    if (norm.trim >= model.output_dim)
        throw InputError(fmt::format("trim {} must be smaller than the output dimension {}",
                                     norm.trim, model.output_dim));
}

const char* to_string(DeciderKind kind) noexcept {
    switch (kind) {
        case DeciderKind::naive: return "naive";
        case DeciderKind::exact: return "exact";
        case DeciderKind::probabilistic: return "prob";
    }
    return "?";
}

DeciderKind decider_from_string(const std::string& name) {
    if (name == "naive") return DeciderKind::naive;
    if (name == "exact") return DeciderKind::exact;
    if (name == "prob" || name == "probabilistic") return DeciderKind::probabilistic;
    throw InputError(fmt::format("unknown decider '{}'", name));
}

double discrepancy(const ModelSpec& model, std::span<const double> x, const Trace& trace,
                   const DiscrepancyNorm& norm) {
    if (x.size() != model.params.dim())
        throw InputError(fmt::format("parameter vector has {} entries, model expects {}",
                                     x.size(), model.params.dim()));
    check_trace(model, trace);
    if (!model.params.contains(x)) throw InputError("parameter vector lies outside the box");
    DiscrepancyEvaluator eval(model, trace, norm);
    return eval.at(x);
}

std::vector<double> normalize_params(const ParameterBox& box, std::span<const double> x) {
    if (x.size() != box.dim())
        throw InputError(fmt::format("expected {} parameters, got {}", box.dim(), x.size()));
    if (!box.contains(x)) throw InputError("parameter vector lies outside the box");
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        z[i] = std::clamp((x[i] - box.lower()[i]) / box.width(i), 0.0, 1.0);
    return z;
}

void denormalize_into(const ParameterBox& box, std::span<const double> z, std::span<double> x) {
    for (std::size_t i = 0; i < z.size(); ++i)
        x[i] = std::clamp(box.lower()[i] + z[i] * box.width(i), box.lower()[i], box.upper()[i]);
}

std::vector<double> denormalize_params(const ParameterBox& box, std::span<const double> z) {
    if (z.size() != box.dim())
        throw InputError(fmt::format("expected {} coordinates, got {}", box.dim(), z.size()));
    for (double v : z)
        if (!(v >= 0.0 && v <= 1.0)) throw InputError("normalized coordinate outside [0,1]");
    std::vector<double> x(z.size());
    denormalize_into(box, z, x);
    return x;
}

DiscrepancyEvaluator::DiscrepancyEvaluator(const ModelSpec& model, const Trace& trace,
                                           DiscrepancyNorm norm)
    : model_(model), trace_(trace), norm_(norm), x_(model.params.dim()), y_(model.output_dim) {
    check_trace(model, trace);
    if (norm_.trim >= model.output_dim)
        throw InputError(fmt::format("trim {} must be smaller than the output dimension {}",
                                     norm_.trim, model.output_dim));
}

double DiscrepancyEvaluator::at_normalized(std::span<const double> z) {
    denormalize_into(model_.params, z, x_);
    return at(x_);
}

double DiscrepancyEvaluator::at(std::span<const double> x) {
    model_.generator(x, trace_.input, y_);
    for (std::size_t i = 0; i < y_.size(); ++i) {
        if (!std::isfinite(y_[i]))
            throw EvaluationError(fmt::format("model produced a non-finite output {}", i));
        y_[i] -= trace_.output[i];
    }
    return norm_.apply(y_);
}

}  // namespace lipval
