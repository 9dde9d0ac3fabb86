#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "apnn/errors.hpp"
#include "apnn/network.hpp"

namespace apnn {

class Tape;

// Handle to one scalar recorded on a tape.
struct Var {
    Tape* tape = nullptr;
    std::int32_t idx = -1;
};

// Outputs of one network-evaluation record: B columns, each with a value
// and one derivative per requested input direction.
struct MlpOutputs {
    Tape* tape = nullptr;
    std::int32_t base = -1;
    int columns = 0;
    int n_dirs = 0;

    Var value(int b) const { return Var{tape, base + static_cast<std::int32_t>(b * (n_dirs + 1))}; }
    Var deriv(int d, int b) const {
        return Var{tape, base + static_cast<std::int32_t>(b * (n_dirs + 1) + 1 + d)};
    }
};

// Reverse-mode tape. Scalar elementary ops store their local partials at
// record time; network evaluations are recorded as fused nodes that keep the
// per-layer forward state (activations and input-direction tangents) needed
// to push output adjoints back onto the flat parameter vector. Input
// derivatives are propagated forward through the layers, parameter gradients
// by the reverse sweep over that computation, so residual terms built from
// values *and* input derivatives differentiate exactly.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Parameter sets must stay alive for the tape's lifetime.
    int register_params(const ParameterSet& params);
    int num_slots() const { return static_cast<int>(slots_.size()); }
    const ParameterSet& slot_params(int slot) const { return *slots_[slot].params; }

    Var constant(double v) { return make_source(v); }

    // A parameter entry as a tape scalar (for penalty terms and tests);
    // its adjoint lands directly on the flat gradient.
    Var param_var(int slot, std::int64_t index);

    Var add(Var a, Var b) { return emit(a.idx, b.idx, 1.0, 1.0, val_[a.idx] + val_[b.idx]); }
    Var sub(Var a, Var b) { return emit(a.idx, b.idx, 1.0, -1.0, val_[a.idx] - val_[b.idx]); }
    Var mul(Var a, Var b) {
        return emit(a.idx, b.idx, val_[b.idx], val_[a.idx], val_[a.idx] * val_[b.idx]);
    }
    Var div(Var a, Var b) {
        const double inv = 1.0 / val_[b.idx];
        return emit(a.idx, b.idx, inv, -val_[a.idx] * inv * inv, val_[a.idx] * inv);
    }
    Var add_const(Var a, double c) { return emit(a.idx, -1, 1.0, 0.0, val_[a.idx] + c); }
    Var mul_const(Var a, double c) { return emit(a.idx, -1, c, 0.0, val_[a.idx] * c); }
    Var neg(Var a) { return emit(a.idx, -1, -1.0, 0.0, -val_[a.idx]); }
    Var exp_(Var a);
    Var tanh_(Var a);
    Var square_(Var a) { return emit(a.idx, -1, 2.0 * val_[a.idx], 0.0, val_[a.idx] * val_[a.idx]); }

    // Evaluate the network in `slot` at B input columns stored row-major as
    // inputs[row * B + col], rows being the input coordinates. `dirs` lists
    // the input rows to differentiate against (at most 3).
    MlpOutputs eval_mlp(int slot, const double* inputs, int columns, std::span<const int> dirs);

    double value(Var v) const { return val_[v.idx]; }
    std::int64_t num_nodes() const { return static_cast<std::int64_t>(val_.size()); }

    // Reverse sweep from `seed`; accumulates into per-slot gradients.
    // Throws NumericError (with the node index) on non-finite values.
    void backward(Var seed);

    std::span<const double> gradient(int slot) const { return slots_[slot].grad; }

    // Drop all recorded nodes and zero gradients; registered slots survive.
    // Called between optimization steps.
    void reset();

private:
    struct Node {
        std::int32_t a, b;
        double pa, pb;
    };
    struct Slot {
        const ParameterSet* params;
        std::vector<double> grad;
    };
    struct MlpRecord {
        int slot;
        int columns;
        int n_dirs;
        std::array<int, 3> dirs;
        std::int64_t arena_off;
        std::int32_t out_base;
    };
    struct ParamRef {
        int slot;
        std::int64_t index;
        std::int32_t node;
    };

    Var make_source(double v) {
        nodes_.push_back(Node{-1, -1, 0.0, 0.0});
        val_.push_back(v);
        return Var{this, static_cast<std::int32_t>(val_.size() - 1)};
    }
    Var emit(std::int32_t a, std::int32_t b, double pa, double pb, double v) {
        nodes_.push_back(Node{a, b, pa, pb});
        val_.push_back(v);
        return Var{this, static_cast<std::int32_t>(val_.size() - 1)};
    }

    void record_backward(const MlpRecord& rec, const std::vector<double>& adj);

    std::vector<Node> nodes_;
    std::vector<double> val_;
    std::vector<Slot> slots_;
    std::vector<MlpRecord> records_;
    std::vector<ParamRef> param_refs_;
    std::vector<double> arena_;

    // backward scratch, reused across records
    std::vector<double> sc_hbar_[2], sc_ubar_[2], sc_zbar_, sc_vbar_, sc_s_;
};

inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.tape->div(a, b); }
inline Var operator-(Var a) { return a.tape->neg(a); }
inline Var operator+(Var a, double c) { return a.tape->add_const(a, c); }
inline Var operator+(double c, Var a) { return a.tape->add_const(a, c); }
inline Var operator-(Var a, double c) { return a.tape->add_const(a, -c); }
inline Var operator-(double c, Var a) { return a.tape->add_const(a.tape->neg(a), c); }
inline Var operator*(Var a, double c) { return a.tape->mul_const(a, c); }
inline Var operator*(double c, Var a) { return a.tape->mul_const(a, c); }
inline Var operator/(Var a, double c) { return a.tape->mul_const(a, 1.0 / c); }
inline Var exp(Var a) { return a.tape->exp_(a); }
inline Var tanh(Var a) { return a.tape->tanh_(a); }
inline Var square(Var a) { return a.tape->square_(a); }

// Gradient of `loss` with respect to the slot's flat parameter vector.
std::vector<double> loss_gradient(Tape& tape, Var loss, int slot);

// Max over parameters of |analytic - central difference| / max(1, |analytic|)
// for a scalar built by `build` on a fresh tape with `params` in slot 0.
double check_gradient(const std::function<Var(Tape&, int)>& build, ParameterSet& params,
                      double step);

// Spec-level convenience: value and exact input derivatives of the plain
// network at one point.
struct ValueAndDerivs {
    double value = 0.0;
    std::array<double, 3> deriv{};  // indexed by input coordinate
};
ValueAndDerivs eval_with_input_derivatives(const ParameterSet& params,
                                           std::span<const double> input,
                                           std::span<const int> directions);

}  // namespace apnn
