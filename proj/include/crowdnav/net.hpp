#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdnav::net {

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LayerParams {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;  // row-major, out x in
    std::vector<double> biases;   // length out

    double& w(std::size_t row, std::size_t col) { return weights[row * in + col]; }
    double w(std::size_t row, std::size_t col) const { return weights[row * in + col]; }
};

// Shared two-layer trunk feeding a scalar critic head and an 81-way actor head.
struct NetworkParams {
    LayerParams linear1;      // 9+5N -> 128
    LayerParams linear2;      // 128 -> 256
    LayerParams critic_head;  // 256 -> 1
    LayerParams actor_head;   // 256 -> 81

    std::size_t input_size() const { return linear1.in; }
    std::size_t n_obstacles() const { return (linear1.in - 9) / 5; }
};

struct ForwardTrace {
    std::vector<double> input;
    std::vector<double> z1, h1;  // linear1 pre-activation / ReLU output
    std::vector<double> z2, h2;  // linear2 pre-activation / ReLU output
    std::vector<double> logits;
    std::vector<double> probs;  // softmax over the actor logits
    double value = 0.0;
};

// Same shape as NetworkParams.
struct GradientSet {
    LayerParams linear1, linear2, critic_head, actor_head;
};

// Gradient of the scalar loss at the two head outputs.
struct OutputGrad {
    double d_value = 0.0;
    std::vector<double> d_logits;  // length 81; empty means all-zero
};

NetworkParams init_network(std::size_t n_obstacles, std::uint64_t rng_seed);

ForwardTrace forward(const NetworkParams& params, std::span<const double> input);

// critic-only convenience
double value_of(const NetworkParams& params, std::span<const double> input);

GradientSet backward(const NetworkParams& params, const ForwardTrace& trace,
                     const OutputGrad& grad_out);

GradientSet zero_gradients(const NetworkParams& params);
void accumulate(GradientSet& into, const GradientSet& grads);
void scale(GradientSet& grads, double factor);

void apply_update(NetworkParams& params, const GradientSet& grads, double learning_rate);

void save_checkpoint(const NetworkParams& params, const std::string& path);
NetworkParams load_checkpoint(const std::string& path);

// throws CheckpointError naming both widths when the loaded network was
// trained for a different obstacle count
void check_n_obstacles(const NetworkParams& params, std::size_t expected);

}  // namespace crowdnav::net
