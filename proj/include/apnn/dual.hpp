#pragma once

#include <array>
#include <cmath>

namespace apnn {

// Forward-mode scalar carrying up to 3 directional derivatives (one per
// tracked input coordinate, enough for (t, x, v)). Arithmetic applies the
// chain rule exactly; untracked directions stay zero.
class Dual {
public:
    static constexpr int kMaxDirs = 3;

    Dual() = default;
    // NOLINTNEXTLINE(google-explicit-constructor): doubles promote like constants.
    Dual(double value) : v_(value) {}
    Dual(double value, int direction) : v_(value) { t_[direction] = 1.0; }

    double value() const { return v_; }
    double tangent(int d) const { return t_[d]; }
    void set_tangent(int d, double x) { t_[d] = x; }

    friend Dual operator+(const Dual& a, const Dual& b) {
        Dual r(a.v_ + b.v_);
        for (int d = 0; d < kMaxDirs; ++d) r.t_[d] = a.t_[d] + b.t_[d];
        return r;
    }
    friend Dual operator-(const Dual& a, const Dual& b) {
        Dual r(a.v_ - b.v_);
        for (int d = 0; d < kMaxDirs; ++d) r.t_[d] = a.t_[d] - b.t_[d];
        return r;
    }
    friend Dual operator-(const Dual& a) {
        Dual r(-a.v_);
        for (int d = 0; d < kMaxDirs; ++d) r.t_[d] = -a.t_[d];
        return r;
    }
    friend Dual operator*(const Dual& a, const Dual& b) {
        Dual r(a.v_ * b.v_);
        for (int d = 0; d < kMaxDirs; ++d) r.t_[d] = a.t_[d] * b.v_ + a.v_ * b.t_[d];
        return r;
    }
    friend Dual operator/(const Dual& a, const Dual& b) {
        Dual r(a.v_ / b.v_);
        const double inv2 = 1.0 / (b.v_ * b.v_);
        for (int d = 0; d < kMaxDirs; ++d) r.t_[d] = (a.t_[d] * b.v_ - a.v_ * b.t_[d]) * inv2;
        return r;
    }
    Dual& operator+=(const Dual& b) { return *this = *this + b; }
    Dual& operator-=(const Dual& b) { return *this = *this - b; }
    Dual& operator*=(const Dual& b) { return *this = *this * b; }

    friend Dual exp(const Dual& a) { return unary(a, std::exp(a.v_), std::exp(a.v_)); }
    friend Dual tanh(const Dual& a) {
        const double y = std::tanh(a.v_);
        return unary(a, y, 1.0 - y * y);
    }
    friend Dual sin(const Dual& a) { return unary(a, std::sin(a.v_), std::cos(a.v_)); }
    friend Dual cos(const Dual& a) { return unary(a, std::cos(a.v_), -std::sin(a.v_)); }
    friend Dual sqrt(const Dual& a) {
        const double y = std::sqrt(a.v_);
        return unary(a, y, 0.5 / y);
    }
    friend Dual square(const Dual& a) { return unary(a, a.v_ * a.v_, 2.0 * a.v_); }

private:
    static Dual unary(const Dual& a, double value, double slope) {
        Dual r(value);
        for (int d = 0; d < kMaxDirs; ++d) r.t_[d] = slope * a.t_[d];
        return r;
    }

    double v_ = 0.0;
    std::array<double, kMaxDirs> t_{};
};

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.value(); }
inline double square(double x) { return x * x; }

}  // namespace apnn
