#include <cmath>
#include <vector>

#include "doctest.h"

#include "cbctforge/ganplan.hpp"
#include "test_support.hpp"

using namespace cbctforge;

TEST_CASE("adversarial losses on worked examples") {
    // perfectly fooled critic, perfect reconstruction
    CHECK(generator_loss({1.0}, {0.5}, {0.5}) == 0.0);
    // fully detected fake, perfect reconstruction
    CHECK(generator_loss({0.0}, {0.5}, {0.5}) == 1.0);
    // fooled critic, 0.01 mean reconstruction error at lambda 100
    CHECK(generator_loss({1.0}, {0.49}, {0.5}, {100.0}) == doctest::Approx(1.0).epsilon(1e-12));
    // means over multi-element critic maps
    CHECK(generator_loss({1.0, 0.0}, {0.5}, {0.5}) == 0.5);

    CHECK(discriminator_loss({1.0}, {0.0}) == 0.0);
    CHECK(discriminator_loss({0.0}, {1.0}) == 1.0);
    CHECK(discriminator_loss({0.5}, {0.5}) == 0.25);
}

TEST_CASE("loss input validation") {
    CHECK_THROWS(generator_loss({}, {0.5}, {0.5}));
    CHECK_THROWS(generator_loss({1.0}, {}, {}));
    CHECK_THROWS(generator_loss({1.0}, {0.5, 0.6}, {0.5}));
    CHECK_THROWS(generator_loss({1.0}, {0.5}, {0.5}, {-1.0}));
    CHECK_THROWS(discriminator_loss({}, {0.5}));
    CHECK_THROWS(discriminator_loss({0.5}, {}));
}

TEST_CASE("loss weighting and sign properties") {
    const std::vector<double> d_fake{0.8, 0.3, 0.6};
    const std::vector<double> y{0.1, 0.9, 0.4, 0.7};
    const std::vector<double> y_hat{0.2, 0.85, 0.35, 0.75};

    const double at50 = generator_loss(d_fake, y_hat, y, {50.0});
    const double at100 = generator_loss(d_fake, y_hat, y, {100.0});
    CHECK(at50 < at100);  // reconstruction term scales with lambda
    CHECK(at50 >= 0.0);
    CHECK(generator_loss(d_fake, y, y, {50.0}) == generator_loss(d_fake, y, y, {100.0}));

    CHECK(discriminator_loss(d_fake, y_hat) >= 0.0);
}

TEST_CASE("receptive field recursion over the stock critic") {
    const auto layers = discriminator_layers();
    REQUIRE(layers.size() == 5);
    CHECK(receptive_field_chain(layers) == std::vector<int>{1, 4, 7, 16, 34, 70});
    CHECK(receptive_field(layers) == 70);
}

TEST_CASE("receptive field edge cases and growth") {
    CHECK(receptive_field({{1, 1, 0}}) == 1);
    CHECK(receptive_field({{3, 1, 0}}) == 3);
    CHECK(receptive_field({{5, 1, 0}}) == 5);
    // stride multiplies what deeper layers see: 4 + 2*(4-1)
    CHECK(receptive_field_chain({{4, 2, 1}, {4, 1, 1}}) == std::vector<int>{1, 4, 10});

    CHECK_THROWS(receptive_field_chain({}));
    CHECK_THROWS(receptive_field_chain({{4, 2, 1, true}}));
    CHECK_THROWS(receptive_field_chain({{0, 1, 0}}));
}

TEST_CASE("shape propagation for convolutions and their transposes") {
    const NetPlan one = shape_plan({128, 128, 128}, {{4, 2, 1}});
    REQUIRE(one.output_dims.size() == 1);
    CHECK(one.output_dims[0] == std::array<int, 3>{64, 64, 64});

    const NetPlan d = shape_plan({128, 128, 128}, discriminator_layers());
    REQUIRE(d.output_dims.size() == 5);
    CHECK(d.output_dims[0] == std::array<int, 3>{64, 64, 64});
    CHECK(d.output_dims[2] == std::array<int, 3>{16, 16, 16});
    CHECK(d.output_dims[3] == std::array<int, 3>{15, 15, 15});
    CHECK(d.output_dims[4] == std::array<int, 3>{14, 14, 14});
    CHECK(d.receptive_field == 70);

    const NetPlan same = shape_plan({10, 11, 12}, {{1, 1, 0}});
    CHECK(same.output_dims[0] == std::array<int, 3>{10, 11, 12});

    // stride-2 conv then its transpose restores the extent
    const NetPlan round = shape_plan({64, 64, 64}, {{4, 2, 1}, {4, 2, 1, true}});
    CHECK(round.output_dims[1] == std::array<int, 3>{64, 64, 64});
    CHECK(round.receptive_field == 0);  // undefined once a transposed layer appears
}

TEST_CASE("the stock generator is an hourglass over 128-cubed patches") {
    const NetPlan g = shape_plan({128, 128, 128}, generator_layers());
    REQUIRE(g.output_dims.size() == 14);
    CHECK(g.output_dims[6] == std::array<int, 3>{1, 1, 1});  // bottleneck
    CHECK(g.output_dims[13] == std::array<int, 3>{128, 128, 128});
    CHECK(g.receptive_field == 0);

    // one halving short: the encoder bottoms out below one voxel
    CHECK_THROWS(shape_plan({64, 64, 64}, generator_layers()));
}

TEST_CASE("shape propagation rejects vanishing extents") {
    CHECK_THROWS_WITH_AS(shape_plan({2, 2, 2}, {{4, 2, 0}}),
                         "shape_plan: layer 1 produces extent 0", std::invalid_argument);
    // the numerator is -1 here; integer division must not round it up to 0
    CHECK_THROWS(shape_plan({1, 1, 1}, {{2, 2, 0}}));
    CHECK_THROWS(shape_plan({0, 4, 4}, {{1, 1, 0}}));
    CHECK_THROWS(shape_plan({4, 4, 4}, {}));
}

TEST_CASE("instance noise anneals linearly to zero") {
    StabilizerConfig cfg;
    CHECK(noise_variance(0, cfg) == 0.2);
    CHECK(noise_variance(99, cfg) == 0.0);
    CHECK(noise_variance(100, cfg) == 0.0);  // one past the end: clamped
    CHECK(noise_variance(50, cfg) == doctest::Approx(0.2 * 49.0 / 99.0).epsilon(1e-12));

    double prev = noise_variance(0, cfg);
    for (int e = 1; e <= cfg.total_epochs; ++e) {
        const double v = noise_variance(e, cfg);
        CHECK(v <= prev);
        CHECK(v >= 0.0);
        prev = v;
    }

    CHECK_THROWS(noise_variance(-1, cfg));
    CHECK_THROWS(noise_variance(101, cfg));
}

TEST_CASE("learning rate holds then decays to zero") {
    CHECK(learning_rate(0) == 0.0002);
    CHECK(learning_rate(49) == 0.0002);
    CHECK(learning_rate(74) == 0.0001);
    CHECK(learning_rate(99) == 0.0);
    CHECK(learning_rate(50) == doctest::Approx(0.0002 * 49.0 / 50.0).epsilon(1e-12));

    CHECK(learning_rate(1, 5) == 0.0002);
    CHECK(learning_rate(3, 5) == doctest::Approx(0.0002 / 3.0).epsilon(1e-12));
    CHECK(learning_rate(4, 5) == 0.0);

    double prev = learning_rate(0);
    for (int e = 1; e < 100; ++e) {
        const double lr = learning_rate(e);
        CHECK(lr <= prev);
        prev = lr;
    }

    CHECK_THROWS(learning_rate(-1));
    CHECK_THROWS(learning_rate(100));
    CHECK_THROWS(learning_rate(0, 1));
}

TEST_CASE("smoothed labels stay inside their band with the right mean") {
    StabilizerConfig cfg;
    Rng rng(7);
    const int n = 100000;
    double real_sum = 0.0, fake_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = smoothed_label(true, cfg, rng);
        const double f = smoothed_label(false, cfg, rng);
        CHECK(r >= 0.7);
        CHECK(r <= 1.2);
        CHECK(f >= 0.0);
        CHECK(f <= 0.3);
        real_sum += r;
        fake_sum += f;
    }
    CHECK(real_sum / n == doctest::Approx(0.95).epsilon(0.01));
    CHECK(fake_sum / n == doctest::Approx(0.15).epsilon(0.01));
}

TEST_CASE("label swaps fire at the configured probability") {
    StabilizerConfig cfg;
    Rng rng(11);
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) hits += swap_decision(cfg, rng);
    const double freq = static_cast<double>(hits) / n;
    CHECK(freq > 0.09);
    CHECK(freq < 0.11);

    cfg.swap_prob = 0.0;
    for (int i = 0; i < 10000; ++i) CHECK_FALSE(swap_decision(cfg, rng));
    cfg.swap_prob = 1.0;
    for (int i = 0; i < 10000; ++i) CHECK(swap_decision(cfg, rng));
}

TEST_CASE("stabilizer settings are validated") {
    StabilizerConfig cfg;
    cfg.validate();
    cfg.fake_label_range = {0.3, 0.0};
    CHECK_THROWS(cfg.validate());
    cfg = StabilizerConfig{};
    cfg.real_label_range = {1.2, 0.7};
    CHECK_THROWS(cfg.validate());
    cfg = StabilizerConfig{};
    cfg.swap_prob = 1.5;
    CHECK_THROWS(cfg.validate());
    cfg = StabilizerConfig{};
    cfg.swap_prob = -0.1;
    CHECK_THROWS(cfg.validate());
    cfg = StabilizerConfig{};
    cfg.noise_v0 = -1.0;
    CHECK_THROWS(cfg.validate());
    cfg = StabilizerConfig{};
    cfg.total_epochs = 1;
    CHECK_THROWS(cfg.validate());
}
