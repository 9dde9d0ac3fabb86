#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "apnn/errors.hpp"
#include "apnn/quadrature.hpp"

namespace apnn {

// Feed-forward layer widths [m_0, ..., m_L]; tanh on hidden layers, affine
// last layer, scalar output.
struct NetworkSpec {
    std::vector<int> layer_widths;

    NetworkSpec() = default;
    explicit NetworkSpec(std::vector<int> widths) : layer_widths(std::move(widths)) { validate(); }

    void validate() const;
    int input_dim() const { return layer_widths.front(); }
    int depth() const { return static_cast<int>(layer_widths.size()) - 1; }  // number of layers
    std::int64_t parameter_count() const;
    std::string to_string() const;
};

// Flat storage of all weights and biases, layer by layer: W[l] row-major
// (m_{l+1} x m_l) followed by b[l]. The flat view is the optimizer's; the
// per-layer accessors are the evaluators'.
class ParameterSet {
public:
    ParameterSet() = default;
    explicit ParameterSet(const NetworkSpec& spec);

    std::span<double> flat() { return std::span<double>(data_); }
    std::span<const double> flat() const { return std::span<const double>(data_); }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

    const double* weights(int layer) const { return data_.data() + w_offset_[layer]; }
    double* weights(int layer) { return data_.data() + w_offset_[layer]; }
    const double* biases(int layer) const { return data_.data() + b_offset_[layer]; }
    double* biases(int layer) { return data_.data() + b_offset_[layer]; }
    std::int64_t weight_offset(int layer) const { return w_offset_[layer]; }
    std::int64_t bias_offset(int layer) const { return b_offset_[layer]; }

    const NetworkSpec& spec() const { return spec_; }

private:
    NetworkSpec spec_;
    std::vector<double> data_;
    std::vector<std::int64_t> w_offset_, b_offset_;
};

// Glorot-uniform weights (bound sqrt(6/(m_l + m_{l+1}))), zero biases;
// bit-reproducible for a fixed seed.
ParameterSet init_parameters(const NetworkSpec& spec, std::uint64_t seed);

// Plain forward pass, generic over the scalar type (double, Dual, ...).
// Parameters may also be lifted to T via the `params` span for
// derivative-w.r.t.-parameter checks.
template <class T>
T mlp_forward_generic(const NetworkSpec& spec, std::span<const T> flat_params,
                      std::span<const T> input) {
    if (static_cast<int>(input.size()) != spec.input_dim())
        throw ConfigError("mlp_forward: input length does not match spec");
    using std::tanh;
    std::vector<T> act(input.begin(), input.end());
    std::vector<T> next;
    std::int64_t off = 0;
    const int L = spec.depth();
    for (int l = 0; l < L; ++l) {
        const int m_in = spec.layer_widths[l];
        const int m_out = spec.layer_widths[l + 1];
        next.assign(m_out, T(0.0));
        for (int i = 0; i < m_out; ++i) {
            T z = flat_params[off + static_cast<std::int64_t>(m_out) * m_in + i];  // bias
            for (int k = 0; k < m_in; ++k)
                z = z + flat_params[off + static_cast<std::int64_t>(i) * m_in + k] * act[k];
            next[i] = (l < L - 1) ? tanh(z) : z;
        }
        act.swap(next);
        off += static_cast<std::int64_t>(m_out) * m_in + m_out;
    }
    return act[0];
}

double mlp_forward(const ParameterSet& params, std::span<const double> input);

// Solution heads. f and rho are parametrized positive via exp(-net);
// g is the raw net minus its velocity average under `rule`, which makes
// <g> vanish to rounding for the same rule.
double f_net(const ParameterSet& params, double t, double x, double v);
double rho_net(const ParameterSet& params, double t, double x);
double g_net(const ParameterSet& params, double t, double x, double v, const QuadratureRule& rule);

// g_net at every node of `rule` (one shared velocity average).
std::vector<double> g_net_nodes(const ParameterSet& params, double t, double x,
                                const QuadratureRule& rule);

// Checkpoint: <path>.bin holds the flat doubles little-endian; <path>.json
// records widths, seed and layout version.
void save_checkpoint(const std::string& path_prefix, const ParameterSet& params,
                     std::uint64_t seed);
ParameterSet load_checkpoint(const std::string& path_prefix);

}  // namespace apnn
