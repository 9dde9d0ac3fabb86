#include "apnn/quadrature.hpp"

#include <cmath>

#include "apnn/rng.hpp"

namespace apnn {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
void legendre_pair(int n, double x, double& p, double& dp) {
    double pm1 = 1.0, pm = x;
    if (n == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * pm - (k - 1.0) * pm1) / k;
        pm1 = pm;
        pm = pk;
    }
    p = pm;
    dp = n * (x * pm - pm1) / (x * x - 1.0);
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
    if (n < 1 || n > 256) throw ConfigError("gauss_legendre: n out of range [1, 256]");
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    rule.measure = 2.0;
    if (n == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 2.0;
        return rule;
    }
    const int half = (n + 1) / 2;
    const double pi = std::acos(-1.0);
    for (int i = 0; i < half; ++i) {
        // Chebyshev guess for the i-th root in descending order.
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double p = 0.0, dp = 1.0;
        bool converged = false;
        for (int it = 0; it < 100; ++it) {
            legendre_pair(n, x, p, dp);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) <= 1e-15) {
                converged = true;
                break;
            }
        }
        if (!converged) throw NumericError("gauss_legendre: Newton iteration did not converge");
        legendre_pair(n, x, p, dp);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Mirror the root so the rule is exactly symmetric.
        rule.nodes[n - 1 - i] = x;
        rule.nodes[i] = -x;
        rule.weights[n - 1 - i] = w;
        rule.weights[i] = w;
    }
    if (n % 2 == 1) rule.nodes[half - 1] = 0.0;
    return rule;
}

QuadratureRule monte_carlo_rule(int n, Philox& rng) {
    if (n < 1) throw ConfigError("monte_carlo_rule: n must be positive");
    QuadratureRule rule;
    rule.measure = 2.0;
    rule.nodes.resize(n);
    rule.weights.assign(n, rule.measure / n);
    for (int i = 0; i < n; ++i) rule.nodes[i] = rng.uniform(-1.0, 1.0);
    return rule;
}

}  // namespace apnn
