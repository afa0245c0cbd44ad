#ifndef SIGLOOP_DSL_DUAL_HPP
#define SIGLOOP_DSL_DUAL_HPP

#include <array>
#include <cassert>

namespace sigloop::dsl {

// Charts carry at most four coordinates; fixed storage keeps duals
// allocation-free in integrator inner loops.
inline constexpr int kMaxDim = 4;

// Forward-mode dual number: a value and up to kMaxDim partial derivatives.
class Dual {
public:
    Dual() = default;

    static Dual constant(double v, int n) {
        Dual d;
        d.v_ = v;
        d.n_ = n;
        return d;
    }

    static Dual variable(double v, int n, int index) {
        assert(index >= 0 && index < n);
        Dual d = constant(v, n);
        d.d_[index] = 1.0;
        return d;
    }

    double value() const { return v_; }
    int size() const { return n_; }
    double partial(int i) const {
        assert(i >= 0 && i < n_);
        return d_[i];
    }

    bool has_partials() const {
        for (int i = 0; i < n_; ++i)
            if (d_[i] != 0.0) return true;
        return false;
    }

    Dual operator-() const {
        Dual r = *this;
        r.v_ = -r.v_;
        for (int i = 0; i < n_; ++i) r.d_[i] = -r.d_[i];
        return r;
    }

    friend Dual operator+(const Dual& a, const Dual& b) {
        assert(a.n_ == b.n_);
        Dual r = a;
        r.v_ += b.v_;
        for (int i = 0; i < a.n_; ++i) r.d_[i] += b.d_[i];
        return r;
    }

    friend Dual operator-(const Dual& a, const Dual& b) {
        assert(a.n_ == b.n_);
        Dual r = a;
        r.v_ -= b.v_;
        for (int i = 0; i < a.n_; ++i) r.d_[i] -= b.d_[i];
        return r;
    }

    friend Dual operator*(const Dual& a, const Dual& b) {
        assert(a.n_ == b.n_);
        Dual r = Dual::constant(a.v_ * b.v_, a.n_);
        for (int i = 0; i < a.n_; ++i)
            r.d_[i] = a.d_[i] * b.v_ + a.v_ * b.d_[i];
        return r;
    }

    // Caller guarantees b.value() != 0.
    friend Dual operator/(const Dual& a, const Dual& b) {
        assert(a.n_ == b.n_);
        Dual r = Dual::constant(a.v_ / b.v_, a.n_);
        for (int i = 0; i < a.n_; ++i)
            r.d_[i] = (a.d_[i] - r.v_ * b.d_[i]) / b.v_;
        return r;
    }

    // Chain rule for a smooth elementary function: fv = f(value),
    // dfv = f'(value).
    static Dual chain(const Dual& a, double fv, double dfv) {
        Dual r = constant(fv, a.n_);
        for (int i = 0; i < a.n_; ++i) r.d_[i] = dfv * a.d_[i];
        return r;
    }

private:
    double v_ = 0.0;
    int n_ = 0;
    std::array<double, kMaxDim> d_{};
};

}  // namespace sigloop::dsl

#endif
