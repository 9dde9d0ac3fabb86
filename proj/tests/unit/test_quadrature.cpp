#include <cmath>
#include <vector>

#include "apnn/quadrature.hpp"
#include "apnn/rng.hpp"
#include "doctest.h"

using namespace apnn;

namespace {
double monomial_integral(int degree) {
    return (degree % 2 == 1) ? 0.0 : 2.0 / (degree + 1);
}
}  // namespace

TEST_SUITE("quadrature") {

TEST_CASE("n=1 is the midpoint rule") {
    const auto rule = gauss_legendre(1);
    REQUIRE(rule.size() == 1);
    CHECK(rule.nodes[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(rule.weights[0] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("n=2 matches the closed-form roots of P2") {
    const auto rule = gauss_legendre(2);
    const double root = 0.5773502691896258;  // 1/sqrt(3)
    CHECK(rule.nodes[0] == doctest::Approx(-root).epsilon(1e-14));
    CHECK(rule.nodes[1] == doctest::Approx(root).epsilon(1e-14));
    CHECK(rule.weights[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rule.weights[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("n=30 integrates v^58 to 2/59") {
    const auto rule = gauss_legendre(30);
    double sum = 0.0;
    for (int i = 0; i < rule.size(); ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], 58);
    CHECK(std::abs(sum - 2.0 / 59.0) / (2.0 / 59.0) < 1e-12);
}

TEST_CASE("rule structure: symmetric increasing nodes, weights sum to measure") {
    for (int n : {2, 3, 7, 16, 31, 64}) {
        const auto rule = gauss_legendre(n);
        double wsum = 0.0;
        for (int i = 0; i < n; ++i) {
            wsum += rule.weights[i];
            if (i > 0) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
            CHECK(rule.nodes[i] == doctest::Approx(-rule.nodes[n - 1 - i]).epsilon(1e-15));
        }
        CHECK(wsum == doctest::Approx(rule.measure).epsilon(1e-14));
    }
}

TEST_CASE("exactness up to degree 2n-1 on a sample of sizes") {
    for (int n : {2, 5, 12, 30, 64}) {
        const auto rule = gauss_legendre(n);
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], d);
            const double exact = monomial_integral(d);
            if (exact == 0.0)
                CHECK(std::abs(sum) < 1e-13);
            else
                CHECK(std::abs(sum - exact) / exact < 1e-12);
        }
    }
}

TEST_CASE("velocity_average: constants, odd functions, v^2 = 1/3") {
    const auto rule = gauss_legendre(30);
    std::vector<double> c(rule.size(), 3.25), odd(rule.size()), sq(rule.size());
    for (int i = 0; i < rule.size(); ++i) {
        odd[i] = rule.nodes[i];
        sq[i] = rule.nodes[i] * rule.nodes[i];
    }
    CHECK(velocity_average<double>(c, rule) == doctest::Approx(3.25).epsilon(1e-15));
    CHECK(std::abs(velocity_average<double>(odd, rule)) < 1e-15);
    CHECK(std::abs(velocity_average<double>(sq, rule) - 1.0 / 3.0) < 1e-14);
}

TEST_CASE("velocity_average rejects mismatched lengths") {
    const auto rule = gauss_legendre(4);
    std::vector<double> bad(3, 1.0);
    CHECK_THROWS_AS(velocity_average<double>(bad, rule), ConfigError);
}

TEST_CASE("project_complement: zero mean, idempotent, odd functions unchanged") {
    const auto rule = gauss_legendre(20);
    Philox rng(7);
    std::vector<double> h(rule.size());
    for (auto& x : h) x = rng.uniform(-2.0, 2.0);
    const auto p1 = project_complement<double>(h, rule);
    CHECK(std::abs(velocity_average<double>(p1, rule)) < 1e-15);
    const auto p2 = project_complement<double>(p1, rule);
    for (int i = 0; i < rule.size(); ++i) CHECK(p2[i] == doctest::Approx(p1[i]).epsilon(1e-15));

    std::vector<double> odd(rule.size());
    for (int i = 0; i < rule.size(); ++i) odd[i] = std::sin(rule.nodes[i]);
    const auto podd = project_complement<double>(odd, rule);
    for (int i = 0; i < rule.size(); ++i) CHECK(podd[i] == doctest::Approx(odd[i]).epsilon(1e-14));
}

TEST_CASE("constant function projects to zero") {
    const auto rule = gauss_legendre(8);
    std::vector<double> c(rule.size(), 1.7);
    for (double x : project_complement<double>(c, rule)) CHECK(std::abs(x) < 1e-15);
}

TEST_CASE("monte carlo rule averages like the uniform law") {
    Philox rng(123);
    const auto rule = monte_carlo_rule(20000, rng);
    std::vector<double> sq(rule.size());
    for (int i = 0; i < rule.size(); ++i) sq[i] = rule.nodes[i] * rule.nodes[i];
    // Var(v^2) on U(-1,1) is 4/45; 3 sigma over 2e4 samples.
    const double tol = 3.0 * std::sqrt(4.0 / 45.0 / 20000.0);
    CHECK(std::abs(velocity_average<double>(sq, rule) - 1.0 / 3.0) < tol);
}

}  // TEST_SUITE
