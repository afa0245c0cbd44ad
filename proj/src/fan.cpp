#include "sigloop/curves/fan.hpp"

#include <algorithm>
#include <cmath>

#include "sigloop/curves/rk45.hpp"
#include "sigloop/errors.hpp"

namespace sigloop::curves {

const char* orientation_name(Orientation o) {
    return o == Orientation::past ? "past" : "future";
}

std::vector<geom::Vec> fan_directions(int spatial_dim, int count) {
    if (spatial_dim < 1 || spatial_dim > dsl::kMaxDim - 1)
        throw InvalidArgument("unsupported spatial dimension");
    if (count < 1) throw InvalidArgument("direction count must be positive");
    std::vector<geom::Vec> dirs;
    dirs.reserve(static_cast<std::size_t>(count));
    const double pi = std::acos(-1.0);
    for (int j = 0; j < count; ++j) {
        geom::Vec v(spatial_dim);
        if (spatial_dim == 1) {
            v(0) = (j % 2 == 0) ? 1.0 : -1.0;
        } else if (spatial_dim == 2) {
            const double phi = 2.0 * pi * j / count;
            v << std::cos(phi), std::sin(phi);
        } else {
            // Fibonacci sphere
            const double z = 1.0 - 2.0 * (j + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = pi * (3.0 - std::sqrt(5.0)) * j;
            v << r * std::cos(phi), r * std::sin(phi), z;
        }
        dirs.push_back(std::move(v));
    }
    return dirs;
}

namespace {

struct ConeCoefficients {
    double a = 0.0;   // g_00
    double bv = 0.0;  // g_0j v^j
    double cv = 0.0;  // g_ij v^i v^j
};

ConeCoefficients cone_coefficients(const geom::Mat& g, const geom::Vec& v) {
    const int sd = static_cast<int>(v.size());
    ConeCoefficients c;
    c.a = g(0, 0);
    for (int j = 0; j < sd; ++j) c.bv += g(0, j + 1) * v(j);
    for (int i = 0; i < sd; ++i)
        for (int j = 0; j < sd; ++j) c.cv += g(i + 1, j + 1) * v(i) * v(j);
    return c;
}

// Roots of  alpha z^2 + 2 beta z + gamma = 0, evaluated stably.
int solve_cone_quadratic(double alpha, double beta, double gamma, double roots[2]) {
    if (std::fabs(alpha) < 1e-300) {
        if (std::fabs(beta) < 1e-300) return 0;
        roots[0] = -gamma / (2.0 * beta);
        return 1;
    }
    const double disc = beta * beta - alpha * gamma;
    if (disc < 0.0) return 0;
    const double sq = std::sqrt(disc);
    const double q = -(beta + std::copysign(sq, beta));
    if (std::fabs(q) < 1e-300) {
        roots[0] = 0.0;
        roots[1] = 0.0;
        return 2;
    }
    roots[0] = q / alpha;
    roots[1] = gamma / q;
    return 2;
}

// Root with the requested sign; the vanishing root wins at the degeneracy.
double pick_signed_root(const double roots[2], int count, double want_sign,
                        const char* what) {
    double best = 0.0;
    bool found = false;
    for (int i = 0; i < count; ++i) {
        if (roots[i] * want_sign > 0.0 && (!found || std::fabs(roots[i]) < std::fabs(best))) {
            best = roots[i];
            found = true;
        }
    }
    if (found) return best;
    for (int i = 0; i < count; ++i) {
        if (!found || std::fabs(roots[i]) < std::fabs(best)) {
            best = roots[i];
            found = true;
        }
    }
    if (!found || std::fabs(best) > 1e-6)
        throw DomainError(std::string(what) + ": no cone direction with the requested time orientation");
    return best;
}

// dt/dsigma for a unit spatial velocity v at the given metric.
double null_tdot(const ConeCoefficients& c, double dir) {
    double roots[2];
    const int m = solve_cone_quadratic(c.a, c.bv, c.cv, roots);
    if (m == 0) throw DomainError("fan tangent undefined: light cone closed");
    return pick_signed_root(roots, m, dir, "fan sigma-phase");
}

// z = dsigma/dt; finite at the degeneracy (the reciprocal quadratic).
double null_z(const ConeCoefficients& c, double dir) {
    double roots[2];
    const int m = solve_cone_quadratic(c.cv, c.bv, c.a, roots);
    if (m == 0) throw DomainError("fan tangent undefined: light cone closed");
    return pick_signed_root(roots, m, dir, "fan t-phase");
}

}  // namespace

FanResult integrate_fan(const geom::MetricSpec& spec, const geom::Vec& seed,
                        const std::vector<geom::Vec>& directions, const FanOptions& options) {
    const int n = spec.dimension();
    const int sd = n - 1;
    if (seed.size() != n) throw InvalidArgument("fan seed has wrong dimension");
    if (directions.empty()) throw InvalidArgument("fan needs at least one direction");
    if (options.speed_fraction <= 0.0 || options.speed_fraction > 1.0)
        throw InvalidArgument("speed fraction must lie in (0, 1]");

    const geom::MetricValue seed_metric = geom::metric_at(spec, seed);
    if (seed_metric.signature != geom::Signature::lorentzian)
        throw DegenerateStart("fan seed is not in the Lorentzian sector");

    const double t0 = seed(0);
    const double dir = options.orientation == Orientation::past ? -1.0 : 1.0;
    const double f = options.speed_fraction;

    FanBox box;
    if (options.box) {
        box = *options.box;
    } else {
        const double span = 4.0 * (std::fabs(t0) + 1.0);
        box = FanBox{t0 - span, t0 + span, span};
    }

    FanResult result;
    result.seed = seed;
    result.orientation = options.orientation;
    result.speed_fraction = f;

    for (const geom::Vec& raw : directions) {
        if (raw.size() != sd) throw InvalidArgument("fan direction has wrong dimension");
        geom::Vec v = raw;
        const double vn = v.norm();
        if (vn < 1e-12) throw InvalidArgument("fan direction is zero");
        v /= vn;

        FanDirection out;
        out.v = v;

        std::vector<CurveSample> samples;
        std::vector<FanArcPoint> arc;

        auto record = [&](double t, const geom::Vec& xhat, double sigma) {
            geom::Vec point(n);
            point(0) = t;
            point.tail(sd) = xhat;
            const geom::MetricValue mv = geom::metric_at(spec, point);
            const ConeCoefficients c = cone_coefficients(mv.g, v);
            const double z = null_z(c, dir);
            CurveSample s;
            s.u = std::fabs(t - t0);
            s.point = point;
            s.tangent.resize(n);
            s.tangent(0) = dir;
            s.tangent.tail(sd) = (f * z * dir) * v;
            s.det_g = mv.det;
            switch (mv.signature) {
                case geom::Signature::lorentzian: s.tag = SampleTag::lorentzian; break;
                case geom::Signature::riemannian: s.tag = SampleTag::riemannian; break;
                case geom::Signature::degenerate: s.tag = SampleTag::on_h; break;
            }
            samples.push_back(std::move(s));
            arc.push_back(FanArcPoint{t, sigma});
        };

        // --- sigma phase: Euclidean spatial arc length as parameter -------
        auto rhs_sigma = [&](double, const State& y, State& dy) {
            geom::Vec point(n);
            for (int i = 0; i < n; ++i) point(i) = y(i);
            const geom::MetricValue mv = geom::metric_at(spec, point);
            const ConeCoefficients c = cone_coefficients(mv.g, v);
            const double tdot = null_tdot(c, dir);
            dy.resize(n);
            dy(0) = tdot;
            for (int j = 0; j < sd; ++j) dy(1 + j) = f * v(j);
        };

        StepControl ctl;
        ctl.rel_tol = options.rel_tol;
        ctl.abs_tol = options.abs_tol;
        ctl.max_step = 0.25 * (std::fabs(t0) + 1.0);

        State y(n);
        for (int i = 0; i < n; ++i) y(i) = seed(i);
        double sigma = 0.0;
        double h = 1e-3 * (std::fabs(t0) + 1.0);
        double det_prev = seed_metric.det;

        record(t0, seed.tail(sd), 0.0);

        bool done = false;
        bool switch_to_t = false;
        const double switch_level = options.switch_fraction * std::fabs(t0);

        for (long step = 0; !done && !switch_to_t; ++step) {
            if (step > 200000) throw DomainError("fan integration exceeded its step budget");
            if (std::fabs(h) < ctl.step_floor) {
                geom::Vec cur(n);
                for (int i = 0; i < n; ++i) cur(i) = y(i);
                if (std::fabs(geom::det_g(spec, cur)) < tol::kNullResidual) {
                    out.crossing = cur;
                    done = true;
                    break;
                }
                throw StepSizeUnderflow("fan integration stalled away from the degeneracy");
            }
            const State y_prev = y;
            const double sigma_prev = sigma;
            if (!rk45_try_step(rhs_sigma, sigma, y, h, ctl)) continue;

            geom::Vec cur(n);
            for (int i = 0; i < n; ++i) cur(i) = y(i);
            const double det_cur = geom::det_g(spec, cur);

            if (det_prev * det_cur < 0.0) {
                // Crossed the degenerate locus inside this step.
                geom::Vec prev(n);
                for (int i = 0; i < n; ++i) prev(i) = y_prev(i);
                const geom::HypersurfacePoint hp = geom::locate_hypersurface(spec, prev, cur);
                const double sig_c = sigma_prev + (sigma - sigma_prev) * hp.s;
                record(hp.point(0), hp.point.tail(sd), sig_c);
                out.crossing = hp.point;
                done = true;
                break;
            }

            if (cur(0) < box.t_min || cur(0) > box.t_max ||
                (cur.tail(sd) - seed.tail(sd)).norm() > box.radius) {
                record(cur(0), cur.tail(sd), sigma);
                out.escaped = true;
                done = true;
                break;
            }

            record(cur(0), cur.tail(sd), sigma);
            det_prev = det_cur;

            if (std::fabs(cur(0)) <= switch_level && cur(0) * dir < 0.0) {
                geom::Vec on_axis = cur;
                on_axis(0) = 0.0;
                if (std::fabs(geom::det_g(spec, on_axis)) < tol::kNullResidual)
                    switch_to_t = true;
            }
        }

        // --- t phase: integrate (sigma, xhat) with t as the variable ------
        if (switch_to_t) {
            const double t_sw = y(0);
            auto rhs_t = [&](double t, const State& w, State& dw) {
                geom::Vec point(n);
                point(0) = t;
                for (int j = 0; j < sd; ++j) point(1 + j) = w(1 + j);
                const geom::MetricValue mv = geom::metric_at(spec, point);
                const ConeCoefficients c = cone_coefficients(mv.g, v);
                const double z = null_z(c, dir);
                dw.resize(1 + sd);
                dw(0) = z;
                for (int j = 0; j < sd; ++j) dw(1 + j) = f * v(j) * z;
            };

            std::vector<double> targets;
            const double floor_t = options.tail_floor * std::fabs(t0);
            for (double t = 0.5 * t_sw; std::fabs(t) >= floor_t; t *= 0.5) targets.push_back(t);
            targets.push_back(0.0);

            State w(1 + sd);
            w(0) = sigma;
            for (int j = 0; j < sd; ++j) w(1 + j) = y(1 + j);
            double t = t_sw;
            double ht = -0.25 * t_sw;

            for (double target : targets) {
                while (std::fabs(target - t) > 0.0) {
                    if (std::fabs(ht) > std::fabs(target - t) || ht * (target - t) <= 0.0)
                        ht = target - t;
                    if (std::fabs(ht) < ctl.step_floor) {
                        t = target;
                        break;
                    }
                    rk45_try_step(rhs_t, t, w, ht, ctl);
                }
                t = target;
                geom::Vec xhat(sd);
                for (int j = 0; j < sd; ++j) xhat(j) = w(1 + j);
                record(t, xhat, w(0));
                if ((xhat - seed.tail(sd)).norm() > box.radius) {
                    out.escaped = true;
                    break;
                }
            }
            if (!out.escaped) {
                out.crossing = samples.back().point;
                if (std::fabs(samples.back().det_g) > tol::kNullResidual)
                    throw DomainError("fan endpoint is not degenerate");
            }
        }

        out.curve = CurvePath::sampled(std::move(samples));
        out.arc = std::move(arc);
        result.directions.push_back(std::move(out));
    }

    const bool all_escaped =
        std::all_of(result.directions.begin(), result.directions.end(),
                    [](const FanDirection& d) { return d.escaped; });
    if (all_escaped && options.throw_if_all_escape)
        throw EscapedBox("every fan direction left the box before reaching a degeneracy");
    return result;
}

FanResult integrate_null_fan(const geom::MetricSpec& spec, const geom::Vec& seed,
                             int direction_count, Orientation orientation) {
    FanOptions options;
    options.orientation = orientation;
    return integrate_fan(spec, seed, fan_directions(spec.dimension() - 1, direction_count),
                         options);
}

}  // namespace sigloop::curves
