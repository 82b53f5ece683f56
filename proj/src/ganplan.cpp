#include "cbctforge/ganplan.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cbctforge {
namespace {

double mean_sq_err_to(const std::vector<double>& v, double target) {
    double s = 0.0;
    for (double x : v) s += (x - target) * (x - target);
    return s / static_cast<double>(v.size());
}

}  // namespace

double generator_loss(const std::vector<double>& d_fake, const std::vector<double>& y_hat,
                      const std::vector<double>& y, const LossConfig& cfg) {
    if (d_fake.empty() || y.empty()) throw std::invalid_argument("generator_loss: empty input");
    if (y_hat.size() != y.size())
        throw std::invalid_argument("generator_loss: y_hat and y shapes differ");
    if (!(cfg.lambda >= 0.0)) throw std::invalid_argument("generator_loss: lambda must be >= 0");

    double l1 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) l1 += std::abs(y[i] - y_hat[i]);
    l1 /= static_cast<double>(y.size());
    return mean_sq_err_to(d_fake, 1.0) + cfg.lambda * l1;
}

double discriminator_loss(const std::vector<double>& d_real, const std::vector<double>& d_fake) {
    if (d_real.empty() || d_fake.empty())
        throw std::invalid_argument("discriminator_loss: empty input");
    return 0.5 * mean_sq_err_to(d_real, 1.0) + 0.5 * mean_sq_err_to(d_fake, 0.0);
}

void StabilizerConfig::validate() const {
    if (!(fake_label_range[0] <= fake_label_range[1]) ||
        !(real_label_range[0] <= real_label_range[1]))
        throw std::invalid_argument("StabilizerConfig: label ranges must be ordered");
    if (!(swap_prob >= 0.0 && swap_prob <= 1.0))
        throw std::invalid_argument("StabilizerConfig: swap_prob must be in [0,1]");
    if (!(noise_v0 >= 0.0)) throw std::invalid_argument("StabilizerConfig: noise_v0 must be >= 0");
    if (total_epochs < 2) throw std::invalid_argument("StabilizerConfig: total_epochs must be >= 2");
}

double smoothed_label(bool is_real, const StabilizerConfig& cfg, Rng& rng) {
    cfg.validate();
    const auto& range = is_real ? cfg.real_label_range : cfg.fake_label_range;
    return rng.uniform(range[0], range[1]);
}

bool swap_decision(const StabilizerConfig& cfg, Rng& rng) {
    cfg.validate();
    return rng.uniform() < cfg.swap_prob;
}

double noise_variance(int epoch, const StabilizerConfig& cfg) {
    cfg.validate();
    if (epoch < 0 || epoch > cfg.total_epochs)
        throw std::invalid_argument("noise_variance: epoch out of range");
    const double v = cfg.noise_v0 * (1.0 - static_cast<double>(epoch) / (cfg.total_epochs - 1));
    return std::max(0.0, v);
}

double learning_rate(int epoch, int total_epochs) {
    if (total_epochs < 2) throw std::invalid_argument("learning_rate: total_epochs must be >= 2");
    if (epoch < 0 || epoch >= total_epochs)
        throw std::invalid_argument("learning_rate: epoch out of range");
    constexpr double base = 0.0002;
    const int half = total_epochs / 2;
    if (epoch < half) return base;
    return base * static_cast<double>(total_epochs - 1 - epoch) /
           static_cast<double>(total_epochs - half);
}

void LayerSpec::validate() const {
    if (kernel < 1 || stride < 1 || pad < 0)
        throw std::invalid_argument("LayerSpec: require kernel >= 1, stride >= 1, pad >= 0");
}

std::vector<int> receptive_field_chain(const std::vector<LayerSpec>& layers) {
    if (layers.empty()) throw std::invalid_argument("receptive_field_chain: no layers");
    std::vector<int> chain{1};
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
        it->validate();
        if (it->transposed)
            throw std::invalid_argument(
                "receptive_field_chain: recursion applies to forward convolutions only");
        chain.push_back(it->kernel + it->stride * (chain.back() - 1));
    }
    return chain;
}

int receptive_field(const std::vector<LayerSpec>& layers) {
    return receptive_field_chain(layers).back();
}

NetPlan shape_plan(const std::array<int, 3>& input_dims, const std::vector<LayerSpec>& layers) {
    for (int n : input_dims)
        if (n < 1) throw std::invalid_argument("shape_plan: input dims must be positive");
    if (layers.empty()) throw std::invalid_argument("shape_plan: no layers");

    NetPlan plan;
    plan.layers = layers;
    plan.input_dims = input_dims;
    std::array<int, 3> dims = input_dims;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& s = layers[l];
        s.validate();
        for (int axis = 0; axis < 3; ++axis) {
            const int n = dims[axis];
            // conv: floor((n + 2 pad - K)/S) + 1; a negative numerator already
            // means an extent below 1
            const int num = n + 2 * s.pad - s.kernel;
            const int out = s.transposed ? (n - 1) * s.stride - 2 * s.pad + s.kernel
                                         : (num < 0 ? 0 : num / s.stride + 1);
            if (out < 1)
                throw std::invalid_argument("shape_plan: layer " + std::to_string(l + 1) +
                                            " produces extent " + std::to_string(out));
            dims[axis] = out;
        }
        plan.output_dims.push_back(dims);
    }

    bool any_transposed = false;
    for (const auto& s : layers) any_transposed |= s.transposed;
    plan.receptive_field = any_transposed ? 0 : receptive_field(layers);
    return plan;
}

std::vector<LayerSpec> discriminator_layers() {
    return {{4, 2, 1}, {4, 2, 1}, {4, 2, 1}, {4, 1, 1}, {4, 1, 1}};
}

std::vector<LayerSpec> generator_layers() {
    std::vector<LayerSpec> layers(7, LayerSpec{4, 2, 1, false});
    layers.insert(layers.end(), 7, LayerSpec{4, 2, 1, true});
    return layers;
}

}  // namespace cbctforge
