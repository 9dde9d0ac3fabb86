#include "apnn/tape.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstring>

#include "apnn/dual.hpp"

namespace apnn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

}  // namespace

Var Tape::exp_(Var a) {
    const double y = std::exp(val_[a.idx]);
    return emit(a.idx, -1, y, 0.0, y);
}

Var Tape::tanh_(Var a) {
    const double y = std::tanh(val_[a.idx]);
    return emit(a.idx, -1, 1.0 - y * y, 0.0, y);
}

int Tape::register_params(const ParameterSet& params) {
    slots_.push_back(Slot{&params, std::vector<double>(params.size(), 0.0)});
    return static_cast<int>(slots_.size() - 1);
}

Var Tape::param_var(int slot, std::int64_t index) {
    if (slot < 0 || slot >= num_slots() || index < 0 || index >= slots_[slot].params->size())
        throw ConfigError("param_var: slot or index out of range");
    const Var v = make_source(slots_[slot].params->flat()[index]);
    param_refs_.push_back(ParamRef{slot, index, v.idx});
    return v;
}

MlpOutputs Tape::eval_mlp(int slot, const double* inputs, int columns, std::span<const int> dirs) {
    const ParameterSet& P = *slots_[slot].params;
    const auto& m = P.spec().layer_widths;
    const int L = P.spec().depth();
    const int B = columns;
    const int K = static_cast<int>(dirs.size());
    if (K > 3) throw ConfigError("eval_mlp: at most 3 derivative directions");
    for (int d : dirs)
        if (d < 0 || d >= m[0]) throw ConfigError("eval_mlp: direction outside input coordinates");

    // Arena layout, per layer l: H_l (m_l x B), then U_{l,d} (m_l x B) per
    // direction, then for hidden transitions the tangent pre-activations
    // V_{l,d} (m_{l+1} x B).
    std::int64_t need = 0;
    for (int l = 0; l < L; ++l) {
        need += static_cast<std::int64_t>(m[l]) * B * (1 + K);
        if (l < L - 1) need += static_cast<std::int64_t>(m[l + 1]) * B * K;
    }
    const std::int64_t arena_off = static_cast<std::int64_t>(arena_.size());
    arena_.resize(arena_off + need);

    auto block_off = [&](int l) {
        std::int64_t off = arena_off;
        for (int ll = 0; ll < l; ++ll) {
            off += static_cast<std::int64_t>(m[ll]) * B * (1 + K);
            if (ll < L - 1) off += static_cast<std::int64_t>(m[ll + 1]) * B * K;
        }
        return off;
    };
    auto H_of = [&](int l) { return arena_.data() + block_off(l); };
    auto U_of = [&](int l, int d) {
        return arena_.data() + block_off(l) + static_cast<std::int64_t>(1 + d) * m[l] * B;
    };
    auto V_of = [&](int l, int d) {
        return arena_.data() + block_off(l) + static_cast<std::int64_t>(1 + K) * m[l] * B +
               static_cast<std::int64_t>(d) * m[l + 1] * B;
    };

    std::memcpy(H_of(0), inputs, sizeof(double) * static_cast<size_t>(m[0]) * B);
    for (int d = 0; d < K; ++d) {
        MatMap U0(U_of(0, d), m[0], B);
        U0.setZero();
        U0.row(dirs[d]).setOnes();
    }

    std::vector<double> y(B, 0.0), ydot(static_cast<size_t>(std::max(K, 1)) * B, 0.0);
    for (int l = 0; l < L; ++l) {
        const int m_in = m[l];
        const int m_out = m[l + 1];
        ConstMatMap W(P.weights(l), m_out, m_in);
        ConstVecMap bias(P.biases(l), m_out);
        ConstMatMap H(H_of(l), m_in, B);
        if (l < L - 1) {
            MatMap Hn(H_of(l + 1), m_out, B);
            Hn.noalias() = W * H;
            Hn.colwise() += bias;
            for (int d = 0; d < K; ++d) {
                ConstMatMap U(U_of(l, d), m_in, B);
                MatMap V(V_of(l, d), m_out, B);
                V.noalias() = W * U;
            }
            Hn = Hn.array().tanh();
            for (int d = 0; d < K; ++d) {
                ConstMatMap V(V_of(l, d), m_out, B);
                MatMap Un(U_of(l + 1, d), m_out, B);
                Un = (1.0 - Hn.array().square()) * V.array();
            }
        } else {
            Eigen::Map<Eigen::RowVectorXd> yv(y.data(), B);
            yv.noalias() = W * H;  // W is 1 x m_in
            yv.array() += bias(0);
            for (int d = 0; d < K; ++d) {
                ConstMatMap U(U_of(l, d), m_in, B);
                Eigen::Map<Eigen::RowVectorXd> yd(ydot.data() + static_cast<std::int64_t>(d) * B,
                                                  B);
                yd.noalias() = W * U;
            }
        }
    }

    const std::int32_t out_base = static_cast<std::int32_t>(val_.size());
    for (int b = 0; b < B; ++b) {
        make_source(y[b]);
        for (int d = 0; d < K; ++d) make_source(ydot[static_cast<std::int64_t>(d) * B + b]);
    }

    MlpRecord rec;
    rec.slot = slot;
    rec.columns = B;
    rec.n_dirs = K;
    rec.dirs = {0, 0, 0};
    for (int d = 0; d < K; ++d) rec.dirs[d] = dirs[d];
    rec.arena_off = arena_off;
    rec.out_base = out_base;
    records_.push_back(rec);

    return MlpOutputs{this, out_base, B, K};
}

void Tape::record_backward(const MlpRecord& rec, const std::vector<double>& adj) {
    const ParameterSet& P = *slots_[rec.slot].params;
    std::vector<double>& grad = slots_[rec.slot].grad;
    const auto& m = P.spec().layer_widths;
    const int L = P.spec().depth();
    const int B = rec.columns;
    const int K = rec.n_dirs;

    auto block_off = [&](int l) {
        std::int64_t off = rec.arena_off;
        for (int ll = 0; ll < l; ++ll) {
            off += static_cast<std::int64_t>(m[ll]) * B * (1 + K);
            if (ll < L - 1) off += static_cast<std::int64_t>(m[ll + 1]) * B * K;
        }
        return off;
    };
    auto H_of = [&](int l) { return arena_.data() + block_off(l); };
    auto U_of = [&](int l, int d) {
        return arena_.data() + block_off(l) + static_cast<std::int64_t>(1 + d) * m[l] * B;
    };
    auto V_of = [&](int l, int d) {
        return arena_.data() + block_off(l) + static_cast<std::int64_t>(1 + K) * m[l] * B +
               static_cast<std::int64_t>(d) * m[l + 1] * B;
    };

    int maxw = 0;
    for (int w : m) maxw = std::max(maxw, w);
    const std::int64_t stride = static_cast<std::int64_t>(maxw) * B;
    for (auto* buf : {&sc_hbar_[0], &sc_hbar_[1], &sc_zbar_})
        if (static_cast<std::int64_t>(buf->size()) < stride) buf->assign(stride, 0.0);
    for (auto* buf : {&sc_ubar_[0], &sc_ubar_[1], &sc_vbar_})
        if (static_cast<std::int64_t>(buf->size()) < stride * std::max(K, 1))
            buf->assign(stride * std::max(K, 1), 0.0);

    std::vector<double> ybar(B), cbar(static_cast<size_t>(std::max(K, 1)) * B, 0.0);
    for (int b = 0; b < B; ++b) {
        ybar[b] = adj[rec.out_base + static_cast<std::int64_t>(b) * (K + 1)];
        for (int d = 0; d < K; ++d)
            cbar[static_cast<std::int64_t>(d) * B + b] =
                adj[rec.out_base + static_cast<std::int64_t>(b) * (K + 1) + 1 + d];
    }

    // output layer L-1: a single affine row
    {
        const int l = L - 1;
        const int m_in = m[l];
        ConstMatMap W(P.weights(l), 1, m_in);
        ConstMatMap H(H_of(l), m_in, B);
        Eigen::Map<const Eigen::RowVectorXd> yb(ybar.data(), B);
        Eigen::Map<Eigen::Matrix<double, 1, Eigen::Dynamic>> gw(grad.data() + P.weight_offset(l),
                                                                m_in);
        gw.noalias() += yb * H.transpose();
        for (int d = 0; d < K; ++d) {
            ConstMatMap U(U_of(l, d), m_in, B);
            Eigen::Map<const Eigen::RowVectorXd> cb(cbar.data() + static_cast<std::int64_t>(d) * B,
                                                    B);
            gw.noalias() += cb * U.transpose();
        }
        grad[P.bias_offset(l)] += yb.sum();

        MatMap hbar(sc_hbar_[0].data(), m_in, B);
        hbar.noalias() = W.transpose() * yb;
        for (int d = 0; d < K; ++d) {
            MatMap ubar(sc_ubar_[0].data() + static_cast<std::int64_t>(d) * stride, m_in, B);
            Eigen::Map<const Eigen::RowVectorXd> cb(cbar.data() + static_cast<std::int64_t>(d) * B,
                                                    B);
            ubar.noalias() = W.transpose() * cb;
        }
    }

    int cur = 0;
    for (int l = L - 2; l >= 0; --l) {
        const int m_in = m[l];
        const int m_out = m[l + 1];
        ConstMatMap W(P.weights(l), m_out, m_in);
        ConstMatMap H(H_of(l), m_in, B);
        ConstMatMap Hn(H_of(l + 1), m_out, B);
        MatMap hbar_in(sc_hbar_[cur].data(), m_out, B);
        MatMap zbar(sc_zbar_.data(), m_out, B);

        // dL/dZ = s .* Hbar + s'' chain through the tangent path:
        //   a = tanh(z), u = (1-a^2) v  =>  z adjoint picks up -2 a (1-a^2) v ubar
        zbar = (1.0 - Hn.array().square()) * hbar_in.array();
        for (int d = 0; d < K; ++d) {
            ConstMatMap V(V_of(l, d), m_out, B);
            MatMap ubar_in(sc_ubar_[cur].data() + static_cast<std::int64_t>(d) * stride, m_out, B);
            zbar.array() += (-2.0 * Hn.array()) * (1.0 - Hn.array().square()) * V.array() *
                            ubar_in.array();
            MatMap vbar(sc_vbar_.data() + static_cast<std::int64_t>(d) * stride, m_out, B);
            vbar = (1.0 - Hn.array().square()) * ubar_in.array();
        }

        MatMap gw(grad.data() + P.weight_offset(l), m_out, m_in);
        Eigen::Map<Eigen::VectorXd> gb(grad.data() + P.bias_offset(l), m_out);
        gw.noalias() += zbar * H.transpose();
        gb.noalias() += zbar.rowwise().sum();
        for (int d = 0; d < K; ++d) {
            ConstMatMap U(U_of(l, d), m_in, B);
            MatMap vbar(sc_vbar_.data() + static_cast<std::int64_t>(d) * stride, m_out, B);
            gw.noalias() += vbar * U.transpose();
        }

        if (l > 0) {
            MatMap hbar_out(sc_hbar_[1 - cur].data(), m_in, B);
            hbar_out.noalias() = W.transpose() * zbar;
            for (int d = 0; d < K; ++d) {
                MatMap vbar(sc_vbar_.data() + static_cast<std::int64_t>(d) * stride, m_out, B);
                MatMap ubar_out(sc_ubar_[1 - cur].data() + static_cast<std::int64_t>(d) * stride,
                                m_in, B);
                ubar_out.noalias() = W.transpose() * vbar;
            }
            cur = 1 - cur;
        }
    }
}

void Tape::backward(Var seed) {
    if (seed.tape != this) throw ConfigError("backward: Var from another tape");
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(val_.size()); ++i)
        if (!std::isfinite(val_[i]))
            throw NumericError("non-finite value at tape node #" + std::to_string(i));

    std::vector<double> adj(val_.size(), 0.0);
    adj[seed.idx] = 1.0;
    for (std::int32_t i = seed.idx; i >= 0; --i) {
        const double a = adj[i];
        if (a == 0.0) continue;
        const Node& n = nodes_[i];
        if (n.a >= 0) adj[n.a] += n.pa * a;
        if (n.b >= 0) adj[n.b] += n.pb * a;
    }
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) record_backward(*it, adj);
    for (const ParamRef& ref : param_refs_) slots_[ref.slot].grad[ref.index] += adj[ref.node];
    for (auto& slot : slots_)
        for (double g : slot.grad)
            if (!std::isfinite(g)) throw NumericError("non-finite parameter gradient");
}

void Tape::reset() {
    nodes_.clear();
    val_.clear();
    records_.clear();
    param_refs_.clear();
    arena_.clear();
    for (auto& slot : slots_) std::fill(slot.grad.begin(), slot.grad.end(), 0.0);
}

std::vector<double> loss_gradient(Tape& tape, Var loss, int slot) {
    tape.backward(loss);
    auto g = tape.gradient(slot);
    return std::vector<double>(g.begin(), g.end());
}

double check_gradient(const std::function<Var(Tape&, int)>& build, ParameterSet& params,
                      double step) {
    if (step <= 0) throw ConfigError("check_gradient: step must be positive");
    std::vector<double> analytic;
    {
        Tape tape;
        const int slot = tape.register_params(params);
        Var loss = build(tape, slot);
        analytic = loss_gradient(tape, loss, slot);
    }
    auto eval = [&]() {
        Tape tape;
        const int slot = tape.register_params(params);
        return tape.value(build(tape, slot));
    };
    double max_rel = 0.0;
    auto flat = params.flat();
    for (std::int64_t i = 0; i < params.size(); ++i) {
        const double save = flat[i];
        flat[i] = save + step;
        const double up = eval();
        flat[i] = save - step;
        const double dn = eval();
        flat[i] = save;
        const double fd = (up - dn) / (2.0 * step);
        const double rel = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(analytic[i]));
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

ValueAndDerivs eval_with_input_derivatives(const ParameterSet& params,
                                           std::span<const double> input,
                                           std::span<const int> directions) {
    const NetworkSpec& spec = params.spec();
    if (static_cast<int>(input.size()) != spec.input_dim())
        throw ConfigError("eval_with_input_derivatives: input length does not match spec");
    std::vector<Dual> in(input.size());
    for (size_t i = 0; i < input.size(); ++i) in[i] = Dual(input[i]);
    for (int d : directions) {
        if (d < 0 || d >= spec.input_dim())
            throw ConfigError("eval_with_input_derivatives: bad direction index");
        in[d].set_tangent(d, 1.0);
    }
    std::vector<Dual> lifted(params.flat().begin(), params.flat().end());
    const Dual out = mlp_forward_generic<Dual>(spec, lifted, in);
    ValueAndDerivs r;
    r.value = out.value();
    for (int d : directions) r.deriv[d] = out.tangent(d);
    return r;
}

}  // namespace apnn
