#pragma once

#include <array>
#include <vector>

#include "cbctforge/rng.hpp"

namespace cbctforge {

struct LossConfig {
    double lambda = 100.0;  // L1 weight; reduction is mean-over-elements
};

// LSGAN objectives:
//   generator:     mean((D(fake) - 1)^2) + lambda * mean(|y - y_hat|)
//   discriminator: 1/2 mean((D(real) - 1)^2) + 1/2 mean(D(fake)^2)
double generator_loss(const std::vector<double>& d_fake, const std::vector<double>& y_hat,
                      const std::vector<double>& y, const LossConfig& cfg = {});
double discriminator_loss(const std::vector<double>& d_real, const std::vector<double>& d_fake);

struct StabilizerConfig {
    std::array<double, 2> fake_label_range{0.0, 0.3};
    std::array<double, 2> real_label_range{0.7, 1.2};
    double swap_prob = 0.1;
    double noise_v0 = 0.2;  // instance-noise variance at epoch 0
    int total_epochs = 100;

    void validate() const;
};

// Uniform draw from the real/fake label range (one-sided label smoothing).
double smoothed_label(bool is_real, const StabilizerConfig& cfg, Rng& rng);

// True with probability cfg.swap_prob (random real/fake label swap).
bool swap_decision(const StabilizerConfig& cfg, Rng& rng);

// Linear anneal v0 -> 0 across epochs [0, total_epochs - 1]; epoch may run one
// past the end (clamped to 0).
double noise_variance(int epoch, const StabilizerConfig& cfg);

// 0.0002 for the first half, then linear decay hitting 0 at the last epoch.
double learning_rate(int epoch, int total_epochs = 100);

struct LayerSpec {
    int kernel = 1;
    int stride = 1;
    int pad = 0;
    bool transposed = false;  // transposed (upsampling) convolution

    void validate() const;
};

struct NetPlan {
    std::vector<LayerSpec> layers;
    std::array<int, 3> input_dims{};
    std::vector<std::array<int, 3>> output_dims;  // after each layer
    int receptive_field = 0;                      // 0 when undefined (transposed layers)
};

// R_{l-1} = K_l + S_l * (R_l - 1), applied output-to-input starting at R = 1.
// The returned chain starts with that 1; the last entry is the input-side
// receptive field. Rejects transposed layers (the recursion does not apply).
std::vector<int> receptive_field_chain(const std::vector<LayerSpec>& layers);
int receptive_field(const std::vector<LayerSpec>& layers);

// Output extent per layer: floor((n + 2 pad - K)/S) + 1 for convolutions,
// (n - 1) S - 2 pad + K for transposed ones. Throws if any extent drops
// below 1.
NetPlan shape_plan(const std::array<int, 3>& input_dims, const std::vector<LayerSpec>& layers);

// The stock architectures: a 5-layer patch discriminator and a U-Net-style
// 7-down/7-up generator, all 4^3 kernels.
std::vector<LayerSpec> discriminator_layers();
std::vector<LayerSpec> generator_layers();

}  // namespace cbctforge
