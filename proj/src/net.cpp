#include "crowdnav/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "crowdnav/actions.hpp"

namespace crowdnav::net {

namespace {

constexpr int kCheckpointVersion = 1;

LayerParams make_layer(std::size_t in, std::size_t out, std::mt19937_64& rng) {
    LayerParams layer;
    layer.in = in;
    layer.out = out;
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    layer.weights.resize(in * out);
    for (auto& w : layer.weights) w = dist(rng);
    layer.biases.assign(out, 0.0);
    return layer;
}

LayerParams zero_layer(std::size_t in, std::size_t out) {
    LayerParams layer;
    layer.in = in;
    layer.out = out;
    layer.weights.assign(in * out, 0.0);
    layer.biases.assign(out, 0.0);
    return layer;
}

std::vector<double> affine(const LayerParams& layer, std::span<const double> input) {
    std::vector<double> out(layer.out);
    for (std::size_t r = 0; r < layer.out; ++r) {
        double acc = layer.biases[r];
        const double* row = layer.weights.data() + r * layer.in;
        for (std::size_t c = 0; c < layer.in; ++c) acc += row[c] * input[c];
        out[r] = acc;
    }
    return out;
}

std::vector<double> relu(const std::vector<double>& z) {
    std::vector<double> h(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) h[i] = z[i] > 0.0 ? z[i] : 0.0;
    return h;
}

// d_out (length out) -> gradient contributions and d_in (length in)
void backprop_layer(const LayerParams& layer, std::span<const double> input,
                    std::span<const double> d_out, LayerParams& grad,
                    std::vector<double>* d_in) {
    for (std::size_t r = 0; r < layer.out; ++r) {
        grad.biases[r] += d_out[r];
        double* grow = grad.weights.data() + r * layer.in;
        for (std::size_t c = 0; c < layer.in; ++c) grow[c] += d_out[r] * input[c];
    }
    if (d_in) {
        d_in->assign(layer.in, 0.0);
        for (std::size_t r = 0; r < layer.out; ++r) {
            const double* row = layer.weights.data() + r * layer.in;
            for (std::size_t c = 0; c < layer.in; ++c) (*d_in)[c] += d_out[r] * row[c];
        }
    }
}

}  // namespace

NetworkParams init_network(std::size_t n_obstacles, std::uint64_t rng_seed) {
    std::mt19937_64 rng(rng_seed);
    NetworkParams p;
    p.linear1 = make_layer(9 + 5 * n_obstacles, 128, rng);
    p.linear2 = make_layer(128, 256, rng);
    p.critic_head = make_layer(256, 1, rng);
    p.actor_head = make_layer(256, actions::ActionTable::kSize, rng);
    return p;
}

ForwardTrace forward(const NetworkParams& params, std::span<const double> input) {
    if (input.size() != params.linear1.in)
        throw ShapeError("input length " + std::to_string(input.size()) +
                         " does not match network width " + std::to_string(params.linear1.in));
    ForwardTrace t;
    t.input.assign(input.begin(), input.end());
    t.z1 = affine(params.linear1, input);
    t.h1 = relu(t.z1);
    t.z2 = affine(params.linear2, t.h1);
    t.h2 = relu(t.z2);
    t.value = affine(params.critic_head, t.h2)[0];
    t.logits = affine(params.actor_head, t.h2);

    // max-subtracted softmax
    const double max_logit = *std::max_element(t.logits.begin(), t.logits.end());
    t.probs.resize(t.logits.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < t.logits.size(); ++k) {
        t.probs[k] = std::exp(t.logits[k] - max_logit);
        sum += t.probs[k];
    }
    for (auto& p : t.probs) p /= sum;
    return t;
}

double value_of(const NetworkParams& params, std::span<const double> input) {
    if (input.size() != params.linear1.in)
        throw ShapeError("input length does not match network width");
    const auto h1 = relu(affine(params.linear1, input));
    const auto h2 = relu(affine(params.linear2, h1));
    return affine(params.critic_head, h2)[0];
}

GradientSet zero_gradients(const NetworkParams& params) {
    GradientSet g;
    g.linear1 = zero_layer(params.linear1.in, params.linear1.out);
    g.linear2 = zero_layer(params.linear2.in, params.linear2.out);
    g.critic_head = zero_layer(params.critic_head.in, params.critic_head.out);
    g.actor_head = zero_layer(params.actor_head.in, params.actor_head.out);
    return g;
}

GradientSet backward(const NetworkParams& params, const ForwardTrace& trace,
                     const OutputGrad& grad_out) {
    GradientSet g = zero_gradients(params);

    std::vector<double> d_h2(params.linear2.out, 0.0);

    if (grad_out.d_value != 0.0) {
        const std::vector<double> d_value{grad_out.d_value};
        std::vector<double> d_h2_critic;
        backprop_layer(params.critic_head, trace.h2, d_value, g.critic_head, &d_h2_critic);
        for (std::size_t i = 0; i < d_h2.size(); ++i) d_h2[i] += d_h2_critic[i];
    }
    if (!grad_out.d_logits.empty()) {
        if (grad_out.d_logits.size() != params.actor_head.out)
            throw ShapeError("logit gradient length mismatch");
        std::vector<double> d_h2_actor;
        backprop_layer(params.actor_head, trace.h2, grad_out.d_logits, g.actor_head, &d_h2_actor);
        for (std::size_t i = 0; i < d_h2.size(); ++i) d_h2[i] += d_h2_actor[i];
    }

    // ReLU subgradient: 0 at and below 0
    std::vector<double> d_z2(d_h2.size());
    for (std::size_t i = 0; i < d_h2.size(); ++i) d_z2[i] = trace.z2[i] > 0.0 ? d_h2[i] : 0.0;

    std::vector<double> d_h1;
    backprop_layer(params.linear2, trace.h1, d_z2, g.linear2, &d_h1);

    std::vector<double> d_z1(d_h1.size());
    for (std::size_t i = 0; i < d_h1.size(); ++i) d_z1[i] = trace.z1[i] > 0.0 ? d_h1[i] : 0.0;

    backprop_layer(params.linear1, trace.input, d_z1, g.linear1, nullptr);
    return g;
}

namespace {

void accumulate_layer(LayerParams& into, const LayerParams& from) {
    for (std::size_t i = 0; i < into.weights.size(); ++i) into.weights[i] += from.weights[i];
    for (std::size_t i = 0; i < into.biases.size(); ++i) into.biases[i] += from.biases[i];
}

void scale_layer(LayerParams& layer, double factor) {
    for (auto& w : layer.weights) w *= factor;
    for (auto& b : layer.biases) b *= factor;
}

void update_layer(LayerParams& layer, const LayerParams& grad, double lr) {
    if (layer.weights.size() != grad.weights.size() || layer.biases.size() != grad.biases.size())
        throw ShapeError("gradient shape does not match parameters");
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
        if (!std::isfinite(grad.weights[i])) throw NumericError("non-finite weight gradient");
        layer.weights[i] -= lr * grad.weights[i];
    }
    for (std::size_t i = 0; i < layer.biases.size(); ++i) {
        if (!std::isfinite(grad.biases[i])) throw NumericError("non-finite bias gradient");
        layer.biases[i] -= lr * grad.biases[i];
    }
}

}  // namespace

void accumulate(GradientSet& into, const GradientSet& grads) {
    accumulate_layer(into.linear1, grads.linear1);
    accumulate_layer(into.linear2, grads.linear2);
    accumulate_layer(into.critic_head, grads.critic_head);
    accumulate_layer(into.actor_head, grads.actor_head);
}

void scale(GradientSet& grads, double factor) {
    scale_layer(grads.linear1, factor);
    scale_layer(grads.linear2, factor);
    scale_layer(grads.critic_head, factor);
    scale_layer(grads.actor_head, factor);
}

void apply_update(NetworkParams& params, const GradientSet& grads, double learning_rate) {
    update_layer(params.linear1, grads.linear1, learning_rate);
    update_layer(params.linear2, grads.linear2, learning_rate);
    update_layer(params.critic_head, grads.critic_head, learning_rate);
    update_layer(params.actor_head, grads.actor_head, learning_rate);
}

namespace {

nlohmann::json layer_to_json(const LayerParams& layer) {
    return {{"in", layer.in}, {"out", layer.out}, {"weights", layer.weights},
            {"biases", layer.biases}};
}

LayerParams layer_from_json(const nlohmann::json& j) {
    LayerParams layer;
    layer.in = j.at("in").get<std::size_t>();
    layer.out = j.at("out").get<std::size_t>();
    layer.weights = j.at("weights").get<std::vector<double>>();
    layer.biases = j.at("biases").get<std::vector<double>>();
    if (layer.weights.size() != layer.in * layer.out || layer.biases.size() != layer.out)
        throw CheckpointError("layer array sizes do not match declared shape");
    return layer;
}

}  // namespace

void save_checkpoint(const NetworkParams& params, const std::string& path) {
    nlohmann::json j;
    j["version"] = kCheckpointVersion;
    j["n_obstacles"] = params.n_obstacles();
    j["action_table_layout"] = actions::ActionTable::kLayout;
    j["linear1"] = layer_to_json(params.linear1);
    j["linear2"] = layer_to_json(params.linear2);
    j["critic_head"] = layer_to_json(params.critic_head);
    j["actor_head"] = layer_to_json(params.actor_head);
    std::ofstream out(path);
    if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
    out << j.dump() << "\n";
    if (!out) throw CheckpointError("write failed: " + path);
}

NetworkParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError("malformed checkpoint " + path + ": " + e.what());
    }
    try {
        if (j.at("version").get<int>() != kCheckpointVersion)
            throw CheckpointError("unsupported checkpoint version in " + path);
        NetworkParams p;
        p.linear1 = layer_from_json(j.at("linear1"));
        p.linear2 = layer_from_json(j.at("linear2"));
        p.critic_head = layer_from_json(j.at("critic_head"));
        p.actor_head = layer_from_json(j.at("actor_head"));
        if (p.linear1.out != 128 || p.linear2.in != 128 || p.linear2.out != 256 ||
            p.critic_head.in != 256 || p.critic_head.out != 1 || p.actor_head.in != 256 ||
            p.actor_head.out != actions::ActionTable::kSize)
            throw CheckpointError("checkpoint topology does not match the expected layer sizes");
        const std::size_t declared = j.at("n_obstacles").get<std::size_t>();
        if (p.linear1.in != 9 + 5 * declared)
            throw CheckpointError("checkpoint input width " + std::to_string(p.linear1.in) +
                                  " inconsistent with declared n_obstacles " +
                                  std::to_string(declared));
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError("malformed checkpoint " + path + ": " + e.what());
    }
}

void check_n_obstacles(const NetworkParams& params, std::size_t expected) {
    if (params.n_obstacles() != expected)
        throw CheckpointError("checkpoint input width " + std::to_string(params.linear1.in) +
                              " (n_obstacles=" + std::to_string(params.n_obstacles()) +
                              ") does not match the configured width " +
                              std::to_string(9 + 5 * expected) +
                              " (n_obstacles=" + std::to_string(expected) + ")");
}

}  // namespace crowdnav::net
