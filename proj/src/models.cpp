#include "lipval/models.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace lipval {

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "linear") return Activation::linear;
    throw InputError(fmt::format("unsupported activation '{}'", name));
}

const char* to_string(Activation act) noexcept {
    switch (act) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::linear: return "linear";
    }
    return "?";
}

double induced_inf_norm(std::span<const double> row_major, std::size_t rows, std::size_t cols) {
    double best = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += std::fabs(row_major[r * cols + c]);
        best = std::max(best, s);
    }
    return best;
}

DenseNetwork::DenseNetwork(std::vector<DenseLayer> layers, std::size_t param_dim,
                           std::size_t input_dim)
    : layers_(std::move(layers)), param_dim_(param_dim), input_dim_(input_dim), max_width_(0) {
    if (layers_.empty()) throw InputError("network has no layers");
    if (param_dim_ < 1) throw InputError("network needs at least one parameter input");
    std::size_t width = param_dim_ + input_dim_;
    max_width_ = width;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const DenseLayer& l = layers_[i];
        if (l.cols != width)
            throw InputError(fmt::format("layers[{}]: expects {} inputs but previous width is {}",
                                         i, l.cols, width));
        if (l.rows < 1) throw InputError(fmt::format("layers[{}]: has no outputs", i));
        if (l.weights.size() != l.rows * l.cols)
            throw InputError(fmt::format("layers[{}]: weight matrix has {} entries, expected {}",
                                         i, l.weights.size(), l.rows * l.cols));
        if (l.bias.size() != l.rows)
            throw InputError(fmt::format("layers[{}]: bias has {} entries, expected {}", i,
                                         l.bias.size(), l.rows));
        width = l.rows;
        max_width_ = std::max(max_width_, width);
    }
}

void DenseNetwork::forward(std::span<const double> x, std::span<const double> u,
                           std::span<double> y) const {
    if (x.size() != param_dim_ || u.size() != input_dim_ || y.size() != output_dim())
        throw InputError(fmt::format("network expects ({}, {}) -> {}, got ({}, {}) -> {}",
                                     param_dim_, input_dim_, output_dim(), x.size(), u.size(),
                                     y.size()));
    thread_local std::vector<double> cur;
    thread_local std::vector<double> next;
    cur.resize(max_width_);
    next.resize(max_width_);
    std::copy(x.begin(), x.end(), cur.begin());
    std::copy(u.begin(), u.end(), cur.begin() + static_cast<std::ptrdiff_t>(param_dim_));

    for (std::size_t li = 0; li < layers_.size(); ++li) {
        const DenseLayer& l = layers_[li];
        for (std::size_t r = 0; r < l.rows; ++r) {
            const double* w = l.weights.data() + r * l.cols;
            double acc = l.bias[r];
            for (std::size_t c = 0; c < l.cols; ++c) acc += w[c] * cur[c];
            switch (l.activation) {
                case Activation::relu: acc = acc > 0.0 ? acc : 0.0; break;
                case Activation::tanh: acc = std::tanh(acc); break;
                case Activation::linear: break;
            }
            if (!std::isfinite(acc))
                throw EvaluationError(
                    fmt::format("non-finite activation in layer {} unit {}", li, r));
            next[r] = acc;
        }
        std::swap(cur, next);
    }
    std::copy(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(output_dim()), y.begin());
}

std::vector<double> DenseNetwork::forward(std::span<const double> x,
                                          std::span<const double> u) const {
    std::vector<double> y(output_dim());
    forward(x, u, y);
    return y;
}

double DenseNetwork::lipschitz_upper_bound() const {
    const DenseLayer& first = layers_.front();
    double bound = 0.0;
    for (std::size_t r = 0; r < first.rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < param_dim_; ++c) s += std::fabs(first.weights[r * first.cols + c]);
        bound = std::max(bound, s);
    }
    for (std::size_t i = 1; i < layers_.size(); ++i)
        bound *= induced_inf_norm(layers_[i].weights, layers_[i].rows, layers_[i].cols);
    return bound;
}

ModelSpec make_network_model(std::shared_ptr<const DenseNetwork> net, ParameterBox params,
                             double lipschitz) {
    if (params.dim() != net->param_dim())
        throw InputError(fmt::format("bounds have {} dimensions but the network takes {} parameters",
                                     params.dim(), net->param_dim()));
    ModelSpec spec{std::move(params), net->input_dim(), net->output_dim(), {}, lipschitz};
    spec.generator = [net](std::span<const double> x, std::span<const double> u,
                           std::span<double> y) { net->forward(x, u, y); };
    spec.validate();
    return spec;
}

ModelSpec make_identity_model(ParameterBox params, std::size_t input_dim) {
    const std::size_t n = params.dim();
    ModelSpec spec{std::move(params), input_dim, n, {}, 1.0};
    spec.generator = [](std::span<const double> x, std::span<const double>, std::span<double> y) {
        std::copy(x.begin(), x.end(), y.begin());
    };
    return spec;
}

ModelSpec make_affine_model(ParameterBox params, std::vector<double> a, std::vector<double> b,
                            std::vector<double> input_matrix, std::size_t input_dim) {
    const std::size_t n = params.dim();
    const std::size_t p = b.size();
    if (p < 1) throw InputError("affine model needs a nonempty offset");
    if (a.size() != p * n)
        throw InputError(fmt::format("affine matrix has {} entries, expected {}x{}", a.size(), p, n));
    if (input_matrix.empty() != (input_dim == 0) || input_matrix.size() != p * input_dim)
        throw InputError(fmt::format("affine input matrix has {} entries, expected {}x{}",
                                     input_matrix.size(), p, input_dim));
    const double lipschitz = induced_inf_norm(a, p, n);
    if (!(lipschitz > 0.0)) throw InputError("affine matrix must not be zero");
    ModelSpec spec{std::move(params), input_dim, p, {}, lipschitz};
    spec.generator = [a = std::move(a), b = std::move(b), bu = std::move(input_matrix), n,
                      input_dim](std::span<const double> x, std::span<const double> u,
                                 std::span<double> y) {
        for (std::size_t r = 0; r < b.size(); ++r) {
            double acc = b[r];
            for (std::size_t c = 0; c < n; ++c) acc += a[r * n + c] * x[c];
            for (std::size_t c = 0; c < input_dim; ++c) acc += bu[r * input_dim + c] * u[c];
            y[r] = acc;
        }
    };
    return spec;
}

namespace mountain_car {

State step(State s, double throttle) noexcept {
    double vel = s.velocity + kPower * throttle - kGravity * std::cos(3.0 * s.position);
    vel = std::clamp(vel, -kMaxSpeed, kMaxSpeed);
    double pos = std::clamp(s.position + vel, kMinPosition, kMaxPosition);
    return {pos, vel};
}

std::array<double, 2> step_pair(State s, double throttle) {
    if (!(s.position >= kMinPosition && s.position <= kMaxPosition) ||
        !(s.velocity >= -kMaxSpeed && s.velocity <= kMaxSpeed))
        throw InputError(fmt::format("mountain car state ({}, {}) out of range", s.position,
                                     s.velocity));
    if (!(throttle >= -1.0 && throttle <= 1.0))
        throw InputError(fmt::format("mountain car throttle {} outside [-1, 1]", throttle));
    const State first = step(s, throttle);
    const State second = step(first, throttle);
    return {first.position, second.position};
}

ParameterBox parameter_box() {
    return ParameterBox({kMinPosition, -kMaxSpeed}, {kMaxPosition, kMaxSpeed});
}

ModelSpec make_model(double lipschitz) {
    ModelSpec spec{parameter_box(), 1, 2, {}, lipschitz};
    spec.generator = [](std::span<const double> x, std::span<const double> u,
                        std::span<double> y) {
        const auto out = step_pair({x[0], x[1]}, u[0]);
        y[0] = out[0];
        y[1] = out[1];
    };
    spec.validate();
    return spec;
}

}  // namespace mountain_car

}  // namespace lipval
