#pragma once

#include <span>
#include <vector>

#include "apnn/errors.hpp"

namespace apnn {

// Gauss-Legendre rule on the symmetric velocity interval Omega = [-1, 1].
// measure = |Omega| = sum of weights.
struct QuadratureRule {
    std::vector<double> nodes;    // strictly increasing, symmetric about 0
    std::vector<double> weights;  // positive
    double measure = 2.0;

    int size() const { return static_cast<int>(nodes.size()); }
};

// Nodes are the roots of the Legendre polynomial P_n, found by Newton
// iteration from Chebyshev initial guesses; weights w = 2 / ((1-x^2) P_n'^2).
// Exact for polynomials of degree <= 2n-1.
QuadratureRule gauss_legendre(int n);

// Pseudo-rule for Monte-Carlo velocity integrals: n uniform nodes on
// (-1, 1), equal weights S/n so the same weighted-average code path applies.
class Philox;
QuadratureRule monte_carlo_rule(int n, Philox& rng);

// <h> = (1/S) sum_i w_i h_i. Works for any scalar type with +, * double.
template <class S>
S velocity_average(std::span<const S> samples, const QuadratureRule& rule) {
    if (static_cast<int>(samples.size()) != rule.size())
        throw ConfigError("velocity_average: sample/node length mismatch");
    S acc = (rule.weights[0] / rule.measure) * samples[0];
    for (int i = 1; i < rule.size(); ++i) acc = acc + (rule.weights[i] / rule.measure) * samples[i];
    return acc;
}

// (I - Pi) h = h - <h>, applied nodewise.
template <class S>
std::vector<S> project_complement(std::span<const S> samples, const QuadratureRule& rule) {
    const S mean = velocity_average(samples, rule);
    std::vector<S> out;
    out.reserve(samples.size());
    for (const S& s : samples) out.push_back(s - mean);
    return out;
}

}  // namespace apnn
