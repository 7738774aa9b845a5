// models.hpp
// Concrete generators: a dense feed-forward network evaluator and a few
// analytic models with known Lipschitz constants.
#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lipval/core.hpp"

namespace lipval {

// All three are 1-Lipschitz, so operator-norm products bound the network.
enum class Activation { relu, tanh, linear };

Activation activation_from_string(const std::string& name);
const char* to_string(Activation act) noexcept;

struct DenseLayer {
    std::size_t rows = 0;  // output width
    std::size_t cols = 0;  // input width
    std::vector<double> weights;  // row-major, rows x cols
    std::vector<double> bias;
    Activation activation = Activation::linear;
};

// Feed-forward network over the concatenation (x, u): the first param_dim
// inputs are parameters, the remaining input_dim are trace inputs.
class DenseNetwork {
public:
    DenseNetwork(std::vector<DenseLayer> layers, std::size_t param_dim, std::size_t input_dim);

    std::size_t param_dim() const noexcept { return param_dim_; }
    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t output_dim() const noexcept { return layers_.back().rows; }
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

    // Throws EvaluationError on a non-finite intermediate value.
    void forward(std::span<const double> x, std::span<const double> u, std::span<double> y) const;
    std::vector<double> forward(std::span<const double> x, std::span<const double> u) const;

    // Product of induced infinity-norms, with the first layer restricted to
    // the parameter columns. An upper bound on L with respect to x.
    double lipschitz_upper_bound() const;

private:
    std::vector<DenseLayer> layers_;
    std::size_t param_dim_;
    std::size_t input_dim_;
    std::size_t max_width_;
};

ModelSpec make_network_model(std::shared_ptr<const DenseNetwork> net, ParameterBox params,
                             double lipschitz);

// G(x, u) = x. Exact L = 1.
ModelSpec make_identity_model(ParameterBox params, std::size_t input_dim = 0);

// G(x, u) = A x + B u + b with A (p x n) and B (p x m) row-major.
// Exact L = max row sum of |A|.
ModelSpec make_affine_model(ParameterBox params, std::vector<double> a, std::vector<double> b,
                            std::vector<double> input_matrix = {}, std::size_t input_dim = 0);

double induced_inf_norm(std::span<const double> row_major, std::size_t rows, std::size_t cols);

// Mountain car, two consecutive updates from state (pos, vel) under throttle u.
namespace mountain_car {

inline constexpr double kMinPosition = -1.2;
inline constexpr double kMaxPosition = 0.6;
inline constexpr double kMaxSpeed = 0.07;
inline constexpr double kPower = 0.001;
inline constexpr double kGravity = 0.0025;
// The constant used for the trained surrogate network; the analytic dynamics
// below are bounded by roughly 3.03 in the infinity norm.
inline constexpr double kLipschitz = 3.47;

struct State {
    double position;
    double velocity;
};

// One classic update with position and velocity clamping.
State step(State s, double throttle) noexcept;

// Returns the two successive positions. Throws InputError when out of range.
std::array<double, 2> step_pair(State s, double throttle);

ParameterBox parameter_box();
ModelSpec make_model(double lipschitz = kLipschitz);

}  // namespace mountain_car

// Portable JSON model document (see README for the schema).
ModelSpec load_model(const std::filesystem::path& path);
ModelSpec parse_model(const std::string& text, const std::string& origin = "<model>");

// Set only for network models; used by the CLI to warn about small L.
struct LoadedModel {
    ModelSpec spec;
    std::shared_ptr<const DenseNetwork> network;
};
LoadedModel parse_model_document(const std::string& text, const std::string& origin);

}  // namespace lipval
