#include <array>
#include <cmath>
#include <cstdio>
#include <vector>

#include "apnn/network.hpp"
#include "apnn/quadrature.hpp"
#include "apnn/rng.hpp"
#include "doctest.h"

using namespace apnn;

TEST_SUITE("network") {

TEST_CASE("init_parameters is deterministic with zero biases") {
    const NetworkSpec spec({2, 4, 1});
    const auto a = init_parameters(spec, 0);
    const auto b = init_parameters(spec, 0);
    REQUIRE(a.size() == b.size());
    for (std::int64_t i = 0; i < a.size(); ++i) CHECK(a.flat()[i] == b.flat()[i]);
    for (int l = 0; l < spec.depth(); ++l)
        for (int i = 0; i < spec.layer_widths[l + 1]; ++i) CHECK(a.biases(l)[i] == 0.0);
    const auto c = init_parameters(spec, 1);
    bool any_diff = false;
    for (std::int64_t i = 0; i < a.size(); ++i) any_diff |= (a.flat()[i] != c.flat()[i]);
    CHECK(any_diff);
}

TEST_CASE("weights respect the Glorot bound") {
    const NetworkSpec spec({3, 256, 1});
    const auto p = init_parameters(spec, 7);
    const double bound0 = std::sqrt(6.0 / (3 + 256));
    const double bound1 = std::sqrt(6.0 / (256 + 1));
    for (int i = 0; i < 256 * 3; ++i) CHECK(std::abs(p.weights(0)[i]) <= bound0);
    for (int i = 0; i < 256; ++i) CHECK(std::abs(p.weights(1)[i]) <= bound1);
    // the sampler actually spreads over the interval
    double max0 = 0.0;
    for (int i = 0; i < 256 * 3; ++i) max0 = std::max(max0, std::abs(p.weights(0)[i]));
    CHECK(max0 > 0.9 * bound0);
}

TEST_CASE("forward pass: affine single layer") {
    NetworkSpec spec({2, 1});
    ParameterSet p(spec);
    p.weights(0)[0] = 1.0;
    p.weights(0)[1] = 1.0;
    const std::array<double, 2> in{2.0, 3.0};
    CHECK(mlp_forward(p, in) == doctest::Approx(5.0));
}

TEST_CASE("forward pass: zero weights reduce to final bias") {
    NetworkSpec spec({2, 5, 3, 1});
    ParameterSet p(spec);  // all zeros
    const std::array<double, 2> in{0.3, -0.8};
    CHECK(mlp_forward(p, in) == doctest::Approx(0.0));
    p.biases(2)[0] = 1.25;
    CHECK(mlp_forward(p, in) == doctest::Approx(1.25));
}

TEST_CASE("forward pass matches an independent matrix evaluation") {
    const NetworkSpec spec({2, 8, 1});
    const auto p = init_parameters(spec, 7);
    const std::array<double, 2> in{0.35, -0.6};

    // hand-rolled re-evaluation
    std::vector<double> h(8);
    for (int i = 0; i < 8; ++i) {
        double z = p.biases(0)[i];
        z += p.weights(0)[i * 2 + 0] * in[0];
        z += p.weights(0)[i * 2 + 1] * in[1];
        h[i] = std::tanh(z);
    }
    double y = p.biases(1)[0];
    for (int i = 0; i < 8; ++i) y += p.weights(1)[i] * h[i];

    CHECK(mlp_forward(p, in) == doctest::Approx(y).epsilon(1e-15));
}

TEST_CASE("forward pass rejects wrong input size") {
    const NetworkSpec spec({3, 4, 1});
    const auto p = init_parameters(spec, 0);
    const std::array<double, 2> in{0.0, 0.0};
    CHECK_THROWS_AS(mlp_forward(p, in), ConfigError);
}

TEST_CASE("f_net and rho_net are positive exponentials of the raw net") {
    NetworkSpec fs({3, 1});
    ParameterSet fp(fs);
    CHECK(f_net(fp, 0.1, 0.2, 0.3) == doctest::Approx(1.0));
    fp.biases(0)[0] = 1.0;
    CHECK(f_net(fp, 0.1, 0.2, 0.3) == doctest::Approx(0.36787944117144233));

    NetworkSpec rs({2, 1});
    ParameterSet rp(rs);
    CHECK(rho_net(rp, 0.5, 0.5) == doctest::Approx(1.0));
    rp.biases(0)[0] = 1.0;
    CHECK(rho_net(rp, 0.5, 0.5) == doctest::Approx(0.36787944117144233));

    const auto fr = init_parameters(NetworkSpec({3, 16, 1}), 3);
    Philox rng(11);
    double fmin = 1e300;
    for (int i = 0; i < 10000; ++i) {
        const double v =
            f_net(fr, rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(-1, 1));
        fmin = std::min(fmin, v);
    }
    CHECK(fmin > 0.0);
}

TEST_CASE("g_net subtracts the velocity average") {
    const auto rule = gauss_legendre(30);

    // raw net independent of v: W maps only (t, x)
    NetworkSpec spec({3, 1});
    ParameterSet p(spec);
    p.weights(0)[0] = 0.7;
    p.weights(0)[1] = -0.4;
    p.weights(0)[2] = 0.0;
    for (double v : {-0.9, 0.1, 0.5})
        CHECK(g_net(p, 0.3, 0.6, v, rule) == doctest::Approx(0.0).epsilon(1e-15));

    // raw net equal to v: odd, so the mean vanishes and g(v) = v
    p.weights(0)[0] = 0.0;
    p.weights(0)[1] = 0.0;
    p.weights(0)[2] = 1.0;
    for (double v : {-0.9, 0.1, 0.5})
        CHECK(g_net(p, 0.3, 0.6, v, rule) == doctest::Approx(v).epsilon(1e-14));

    // random network: conservation by construction at random (t, x)
    const auto gp = init_parameters(NetworkSpec({3, 32, 32, 1}), 21);
    Philox rng(5);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto vals = g_net_nodes(gp, rng.uniform(0, 1), rng.uniform(0, 1), rule);
        worst = std::max(worst, std::abs(velocity_average<double>(vals, rule)));
    }
    CHECK(worst <= 1e-14);
}

TEST_CASE("checkpoint round-trip is lossless") {
    const NetworkSpec spec({3, 10, 5, 1});
    const auto p = init_parameters(spec, 99);
    const std::string prefix = "/tmp/apnn_test_ckpt";
    save_checkpoint(prefix, p, 99);
    const auto q = load_checkpoint(prefix);
    REQUIRE(q.size() == p.size());
    for (std::int64_t i = 0; i < p.size(); ++i) CHECK(q.flat()[i] == p.flat()[i]);
    CHECK(q.spec().layer_widths == spec.layer_widths);
    std::remove((prefix + ".bin").c_str());
    std::remove((prefix + ".json").c_str());
}

TEST_CASE("parameter count formula") {
    const NetworkSpec spec({3, 64, 64, 64, 1});
    CHECK(spec.parameter_count() == 64 * 4 + 64 * 65 + 64 * 65 + 65);
    CHECK(init_parameters(spec, 0).size() == spec.parameter_count());
}

}  // TEST_SUITE
