#ifndef SIGLOOP_CURVES_RK45_HPP
#define SIGLOOP_CURVES_RK45_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "sigloop/errors.hpp"
#include "sigloop/tolerances.hpp"

namespace sigloop::curves {

// State vectors are at most kMaxDim coordinates plus a kMaxDim x kMaxDim
// frame, i.e. 20 doubles.
using State = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 20, 1>;

struct StepControl {
    double rel_tol = tol::kOdeRel;
    double abs_tol = tol::kOdeAbs;
    double max_step = 0.0;  // 0 = unlimited
    double step_floor = tol::kStepFloor;
};

// One adaptive Dormand-Prince 5(4) step from (u, y) toward u + h (h may be
// negative).  F is f(double u, const State& y, State& dydu); it may throw,
// which is treated as a rejected step.  Returns the accepted step size and
// updates u, y, and the suggested next step h.
//
// The derivative at the accepted left endpoint is reported through k1_out so
// callers can build Hermite interpolants for event localization.
template <class F>
bool rk45_try_step(F&& f, double& u, State& y, double& h, const StepControl& ctl,
                   State* k1_out = nullptr, State* k_end = nullptr) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                        e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

    State k1, k2, k3, k4, k5, k6, k7, ynew;
    try {
        f(u, y, k1);
        State t;
        t = y + h * (a21 * k1);
        f(u + c2 * h, t, k2);
        t = y + h * (a31 * k1 + a32 * k2);
        f(u + c3 * h, t, k3);
        t = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(u + c4 * h, t, k4);
        t = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(u + c5 * h, t, k5);
        t = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(u + h, t, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(u + h, ynew, k7);
    } catch (const Error&) {
        h *= 0.5;
        return false;
    }

    State y4 = y + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = 0.0;
    bool finite = ynew.allFinite() && y4.allFinite();
    if (finite) {
        for (int i = 0; i < y.size(); ++i) {
            double sc = ctl.abs_tol +
                        ctl.rel_tol * std::max(std::fabs(y(i)), std::fabs(ynew(i)));
            err = std::max(err, std::fabs(ynew(i) - y4(i)) / sc);
        }
    }

    if (!finite || err > 1.0) {
        double shrink = finite ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
        h *= shrink;
        return false;
    }

    if (k1_out) *k1_out = k1;
    if (k_end) *k_end = k7;
    u += h;
    y = ynew;
    double grow = err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
    h *= grow;
    if (ctl.max_step > 0.0 && std::fabs(h) > ctl.max_step)
        h = std::copysign(ctl.max_step, h);
    return true;
}

}  // namespace sigloop::curves

#endif
