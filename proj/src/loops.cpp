#include "sigloop/loops/loops.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "sigloop/curves/fan.hpp"
#include "sigloop/curves/rk45.hpp"
#include "sigloop/errors.hpp"
#include "sigloop/loops/nelder_mead.hpp"
#include "sigloop/rng.hpp"

namespace sigloop::loops {

namespace {

using curves::CurvePath;
using curves::CurveSample;
using curves::SampleTag;

std::string point_str(const geom::Vec& p) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < p.size(); ++i) {
        if (i) os << ", ";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", p(i));
        os << buf;
    }
    os << ")";
    return os.str();
}

geom::Vec make_point(double t, const geom::Vec& xhat) {
    geom::Vec p(xhat.size() + 1);
    p(0) = t;
    p.tail(xhat.size()) = xhat;
    return p;
}

geom::Vec axis_direction(int sd) {
    geom::Vec v(sd);
    v.setZero();
    v(0) = 1.0;
    return v;
}

// Smallest eigenvalue of the spatial block, optionally with its eigenvector
// (sign fixed by the first nonzero entry for determinism).
double spatial_lambda_min(const geom::Mat& g, geom::Vec* direction) {
    const int sd = static_cast<int>(g.rows()) - 1;
    const geom::Mat block = g.block(1, 1, sd, sd);
    Eigen::SelfAdjointEigenSolver<geom::Mat> es(block);
    if (direction) {
        *direction = es.eigenvectors().col(0);
        for (int i = 0; i < sd; ++i) {
            if (std::fabs((*direction)(i)) > 1e-12) {
                if ((*direction)(i) < 0.0) *direction = -(*direction);
                break;
            }
        }
    }
    return es.eigenvalues()(0);
}

geom::Vec clamp_into_box(const CompactBox& box, geom::Vec p) {
    const int sd = static_cast<int>(p.size()) - 1;
    p(0) = std::clamp(p(0), 0.0, box.t0);
    geom::Vec off = p.tail(sd) - box.center;
    const double r = off.norm();
    if (r > box.xi0) p.tail(sd) = box.center + (box.xi0 / r) * off;
    return p;
}

void check_box(const CompactBox& box, int sd) {
    if (box.t0 <= 0.0) throw InvalidArgument("compact box needs t0 > 0");
    if (box.xi0 <= 0.0) throw InvalidArgument("compact box needs xi0 > 0");
    if (box.center.size() != sd)
        throw InvalidArgument("compact box center has wrong spatial dimension");
}

// Positive root z = dsigma/dt of the null condition C z^2 + 2 B z + A = 0
// along a unit spatial direction; finite and zero on the hypersurface.
double ascending_null_z(const geom::Mat& g, const geom::Vec& v) {
    const int sd = static_cast<int>(g.rows()) - 1;
    const double A = g(0, 0);
    double B = 0.0;
    for (int j = 0; j < sd; ++j) B += g(0, 1 + j) * v(j);
    const double C = v.dot(g.block(1, 1, sd, sd) * v);
    if (C <= 0.0) throw DomainError("spatial form is not positive along the leg direction");
    const double disc = B * B - A * C;
    if (disc < 0.0) throw DomainError("light cone closed along the leg direction");
    const double z = (-B + std::sqrt(disc)) / C;
    if (z < 0.0) throw DomainError("no future-ascending null slope along the leg direction");
    return z;
}

CurveSample make_sample(const geom::MetricSpec& spec, double u, const geom::Vec& point,
                        const geom::Vec& tangent) {
    const geom::MetricValue mv = geom::metric_at(spec, point);
    CurveSample s;
    s.u = u;
    s.point = point;
    s.tangent = tangent;
    s.det_g = mv.det;
    switch (mv.signature) {
        case geom::Signature::lorentzian: s.tag = SampleTag::lorentzian; break;
        case geom::Signature::riemannian: s.tag = SampleTag::riemannian; break;
        case geom::Signature::degenerate: s.tag = SampleTag::on_h; break;
    }
    return s;
}

// Samples an analytic arc s in [0, 1] -> (point, tangent) on a uniform grid,
// mapping s to [u_begin, u_begin + 1].
std::vector<CurveSample> sample_arc(
    const geom::MetricSpec& spec, double u_begin, int count,
    const std::function<void(double, geom::Vec*, geom::Vec*)>& arc) {
    std::vector<CurveSample> out;
    out.reserve(count);
    geom::Vec point, tangent;
    for (int k = 0; k < count; ++k) {
        const double s = static_cast<double>(k) / (count - 1);
        arc(s, &point, &tangent);
        out.push_back(make_sample(spec, u_begin + s, point, tangent));
    }
    return out;
}

bool tangents_positively_proportional(const geom::Vec& x, const geom::Vec& y) {
    const double nx = x.norm();
    const double ny = y.norm();
    if (nx == 0.0 || ny == 0.0) return false;
    if (x.dot(y) <= 0.0) return false;
    return (y - (ny / nx) * x).norm() <= 1e-8 * std::max(1.0, ny);
}

double metric_norm(const geom::MetricSpec& spec, const geom::Vec& point, const geom::Vec& x) {
    const geom::Mat g = geom::metric_at(spec, point).g;
    return x.dot(g * x);
}

}  // namespace

const char* segment_role_name(SegmentRole role) {
    switch (role) {
        case SegmentRole::lorentzian_past: return "lorentzian-past";
        case SegmentRole::lorentzian_future: return "lorentzian-future";
        case SegmentRole::riemannian_connector: return "riemannian-connector";
    }
    return "?";
}

ComparisonMetric minimize_spatial_form(const geom::MetricSpec& spec, const CompactBox& box,
                                       int grid_resolution) {
    const int n = spec.dimension();
    const int sd = n - 1;
    if (!spec.normal_form())
        throw InvalidArgument("spatial-form minimization requires a normal-form chart");
    check_box(box, sd);
    if (grid_resolution < 2) throw InvalidArgument("grid resolution must be at least 2");

    const int res_t = grid_resolution;
    const int res_x = (n == 4) ? std::min(grid_resolution, 12) : grid_resolution;

    auto lambda_at = [&](const geom::Vec& p) -> double {
        geom::MetricValue mv;
        try {
            mv = geom::metric_at(spec, p);
        } catch (const DomainError& e) {
            throw BoxOutsideChart(std::string("metric undefined at ") + point_str(p) + ": " +
                                  e.what());
        }
        const double lam = spatial_lambda_min(mv.g, nullptr);
        if (lam <= 0.0)
            throw NotPositiveDefinite("spatial form has eigenvalue " + std::to_string(lam) +
                                      " at " + point_str(p));
        return lam;
    };

    double best = std::numeric_limits<double>::infinity();
    geom::Vec best_point;

    // Spatial offsets: the cube grid restricted to the ball, plus the center.
    std::vector<geom::Vec> offsets;
    offsets.push_back(geom::Vec::Zero(sd));
    std::vector<int> idx(sd, 0);
    for (;;) {
        geom::Vec off(sd);
        for (int j = 0; j < sd; ++j)
            off(j) = -box.xi0 + 2.0 * box.xi0 * idx[j] / (res_x - 1);
        if (off.norm() <= box.xi0 * (1.0 + 1e-12)) offsets.push_back(off);
        int k = 0;
        while (k < sd && ++idx[k] == res_x) idx[k++] = 0;
        if (k == sd) break;
    }

    for (int it = 0; it < res_t; ++it) {
        const double t = box.t0 * it / (res_t - 1);
        for (const geom::Vec& off : offsets) {
            const geom::Vec p = make_point(t, box.center + off);
            const double lam = lambda_at(p);
            if (lam < best) {
                best = lam;
                best_point = p;
            }
        }
    }

    auto objective = [&](const std::vector<double>& vars) -> double {
        geom::Vec p(n);
        for (int i = 0; i < n; ++i) p(i) = vars[i];
        p = clamp_into_box(box, p);
        try {
            return spatial_lambda_min(geom::metric_at(spec, p).g, nullptr);
        } catch (const Error&) {
            return 1e300;
        }
    };
    std::vector<double> start(n);
    for (int i = 0; i < n; ++i) start[i] = best_point(i);
    const double scale =
        0.5 * std::min(box.t0 / (res_t - 1), 2.0 * box.xi0 / (res_x - 1));
    const NelderMeadResult nm =
        nelder_mead(objective, start, scale, tol::kMinimizeValue, 400);

    geom::Vec refined(n);
    for (int i = 0; i < n; ++i) refined(i) = nm.x[i];
    refined = clamp_into_box(box, refined);
    if (nm.value <= best) {
        best = nm.value;
        best_point = refined;
    }

    ComparisonMetric cm;
    cm.minimizer_point = best_point;
    cm.G0 = spatial_lambda_min(geom::metric_at(spec, best_point).g, &cm.minimizer_direction);
    if (cm.G0 <= 0.0)
        throw NotPositiveDefinite("spatial form minimum is not positive on the box");

    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", cm.G0);
    std::map<std::pair<int, int>, std::string> comps;
    comps[{0, 0}] = "-" + spec.coordinates()[0];
    for (int j = 1; j < n; ++j) comps[{j, j}] = buf;
    cm.bound = geom::MetricSpec::create(spec.coordinates(), comps, true);
    return cm;
}

ContainmentReport cone_containment_check(const geom::MetricSpec& spec,
                                         const ComparisonMetric& comparison,
                                         const CompactBox& box, int sample_count,
                                         std::uint64_t seed) {
    const int n = spec.dimension();
    const int sd = n - 1;
    if (!spec.normal_form())
        throw InvalidArgument("cone containment requires a normal-form chart");
    check_box(box, sd);
    if (comparison.G0 <= 0.0) throw InvalidArgument("comparison bound must be positive");
    if (sample_count < 1) throw InvalidArgument("containment check needs samples");

    SplitMix64 rng(seed);
    ContainmentReport report;
    report.samples = sample_count;
    report.min_value = std::numeric_limits<double>::infinity();

    geom::Vec xoff(sd), u(sd), X(n);
    for (int k = 0; k < sample_count; ++k) {
        const double t = std::max((1.0 - rng.unit()) * box.t0, 1e-12 * box.t0);
        for (;;) {
            for (int j = 0; j < sd; ++j) xoff(j) = rng.symmetric() * box.xi0;
            if (xoff.norm() <= box.xi0) break;
        }
        double norm2;
        for (;;) {
            for (int j = 0; j < sd; ++j) u(j) = rng.symmetric();
            norm2 = u.squaredNorm();
            if (norm2 <= 1.0 && norm2 > 1e-6) break;
        }
        u /= std::sqrt(norm2);
        const double sign = rng.unit() < 0.5 ? -1.0 : 1.0;

        X(0) = sign * std::sqrt(comparison.G0 / t);
        X.tail(sd) = u;
        const geom::Vec p = make_point(t, box.center + xoff);
        const double value = X.dot(geom::metric_at(spec, p).g * X);
        report.min_value = std::min(report.min_value, value);
        if (value < -tol::kConeContain) {
            std::ostringstream os;
            os << "bound-null vector has g(X,X) = " << value << " at " << point_str(p);
            throw ContainmentViolated(os.str());
        }
    }
    return report;
}

geom::Vec choose_apex(const ComparisonMetric& comparison, const CompactBox& box) {
    check_box(box, static_cast<int>(box.center.size()));
    if (comparison.G0 <= 0.0) throw InvalidArgument("comparison bound must be positive");
    const double width = (2.0 / 3.0) * std::sqrt(box.t0 * box.t0 * box.t0 / comparison.G0);
    double t_apex = box.t0;
    if (width > box.xi0) {
        const double t1 = std::cbrt(2.25 * box.xi0 * box.xi0 * comparison.G0);
        t_apex = std::min(t1, 0.99 * box.t0);
    }
    return make_point(t_apex, box.center);
}

namespace {

// --- shared loop-construction machinery -------------------------------------

struct FanPair {
    CurvePath past;     // apex -> first crossing, t descending
    CurvePath future;   // second crossing -> apex, t ascending
    geom::Vec c1, c2;   // the two hypersurface crossings (full coordinates)
};

FanPair integrate_fan_pair(const geom::MetricSpec& spec, const geom::Vec& apex,
                           const CompactBox& box, double f) {
    const int sd = spec.dimension() - 1;
    const geom::Vec v1 = axis_direction(sd);

    curves::FanOptions fo;
    fo.orientation = curves::Orientation::past;
    fo.speed_fraction = f;
    fo.box = curves::FanBox{-0.1 * box.t0, box.t0 * (1.0 + 1e-9), box.xi0 * (1.0 + 1e-9)};
    fo.throw_if_all_escape = false;

    const curves::FanResult fan =
        curves::integrate_fan(spec, apex, {v1, geom::Vec(-v1)}, fo);
    for (const curves::FanDirection& d : fan.directions)
        if (d.escaped)
            throw EscapedBox("fan leg left the compact box; enlarge xi0 or lower t0");

    FanPair pair;
    pair.c1 = fan.directions[0].crossing;
    pair.c2 = fan.directions[1].crossing;
    if ((pair.c1.tail(sd) - pair.c2.tail(sd)).norm() < 1e-10 * (1.0 + box.xi0))
        throw CrossingsCoincide("the two fan crossings coincide");
    pair.past = fan.directions[0].curve;
    pair.future = fan.directions[1].curve.reversed();
    return pair;
}

// Box sized so the full-height null fan fits with margin; runs the spatial
// minimization as part of the fit.
CompactBox fit_box(const geom::MetricSpec& spec, double t0, const geom::Vec& center,
                   double xi0_user, int grid_resolution, ComparisonMetric* comparison) {
    CompactBox box{t0, center, xi0_user};
    if (xi0_user > 0.0) {
        *comparison = minimize_spatial_form(spec, box, grid_resolution);
        return box;
    }
    double g_line = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 64; ++k) {
        const geom::Vec p = make_point(t0 * k / 64.0, center);
        try {
            g_line = std::min(g_line, spatial_lambda_min(geom::metric_at(spec, p).g, nullptr));
        } catch (const DomainError& e) {
            throw BoxOutsideChart(std::string("metric undefined at ") + point_str(p) + ": " +
                                  e.what());
        }
    }
    if (g_line <= 0.0)
        throw NotPositiveDefinite("spatial form is not positive along the box axis");

    box.xi0 = 1.3 * (2.0 / 3.0) * std::sqrt(t0 * t0 * t0 / g_line);
    for (int iter = 0; iter < 5; ++iter) {
        *comparison = minimize_spatial_form(spec, box, grid_resolution);
        const double need =
            (2.0 / 3.0) * std::sqrt(t0 * t0 * t0 / comparison->G0);
        if (1.02 * need <= box.xi0) return box;
        box.xi0 = 1.3 * need;
    }
    throw DomainError("could not fit a compact box around the null fan");
}

void validate_options(const LoopOptions& options) {
    if (options.t0 <= 0.0) throw InvalidArgument("t0 must be positive");
    if (options.cone_fraction <= 0.0 || options.cone_fraction >= 1.0)
        throw InvalidArgument("cone fraction must lie strictly between 0 and 1");
}

IntersectionRecord endpoint_record(const geom::MetricSpec& spec,
                                   const std::vector<LoopSegment>& segments) {
    const CurveSample& first = segments.front().path.samples().front();
    const CurveSample& last = segments.back().path.samples().back();
    IntersectionRecord rec;
    rec.point_first = first.point;
    rec.point_second = last.point;
    rec.tangent_first = first.tangent;
    rec.tangent_second = last.tangent;
    rec.g_first = metric_norm(spec, first.point, first.tangent);
    rec.g_second = metric_norm(spec, last.point, last.tangent);
    rec.positively_proportional =
        tangents_positively_proportional(first.tangent, last.tangent);
    rec.sector = "lorentzian";
    return rec;
}

void finish_certificate(const geom::MetricSpec& spec, LoopCertificate* cert) {
    for (LoopSegment& seg : cert->segments) {
        if (seg.role == SegmentRole::riemannian_connector) continue;
        seg.classification = gap::run_classification(spec, seg.path, {}).report;
    }
    cert->endpoint_intersection = endpoint_record(spec, cert->segments);
    cert->closure_residual = (cert->endpoint_intersection.point_first -
                              cert->endpoint_intersection.point_second)
                                 .norm();
    cert->loop_class = cert->endpoint_intersection.positively_proportional
                           ? "closed-pseudo-timelike"
                           : "loop";
}

CrossingRecord crossing_record(const geom::MetricSpec& spec, const geom::Vec& point) {
    CrossingRecord rec;
    rec.point = point;
    rec.det_g = geom::det_g(spec, point);
    rec.radical = geom::radical_check(spec, point).verdict;
    return rec;
}

// Connector below the hypersurface joining two crossing points by a shallow
// spatial dip; endpoints sit exactly on t = 0.
CurvePath dip_connector(const geom::MetricSpec& spec, const geom::Vec& c1,
                        const geom::Vec& c2, double depth) {
    const int sd = static_cast<int>(c1.size()) - 1;
    const geom::Vec x1 = c1.tail(sd);
    const geom::Vec dx = geom::Vec(c2.tail(sd) - x1);
    auto arc = [&](double s, geom::Vec* point, geom::Vec* tangent) {
        const double pi = 3.14159265358979323846;
        const double t = -depth * std::sin(pi * s);
        const double dt = -depth * pi * std::cos(pi * s);
        const double blend = s * s * (3.0 - 2.0 * s);
        const double dblend = 6.0 * s * (1.0 - s);
        *point = make_point(t, x1 + blend * dx);
        tangent->resize(sd + 1);
        (*tangent)(0) = dt;
        tangent->tail(sd) = dblend * dx;
    };
    return CurvePath::sampled(sample_arc(spec, 0.0, 257, arc));
}

// Timelike leg ascending from the hypersurface point (0, xhat0) along vhat,
// with time-dependent speed fraction u(t).  Parameter is t itself; samples
// cluster geometrically toward t = 0 so the frame transport and the gap
// quadratures resolve the degenerate end.
CurvePath integrate_ascending_leg(const geom::MetricSpec& spec, const geom::Vec& xhat0,
                                  const geom::Vec& vhat, double eps,
                                  const std::function<double(double)>& ufrac,
                                  double* displacement) {
    const int n = spec.dimension();
    const int sd = n - 1;

    std::vector<double> targets{0.0};
    for (double t = eps; t >= 1e-6 * eps; t *= 0.5) targets.push_back(t);
    for (int k = 1; k < 32; ++k) targets.push_back(eps * k / 32.0);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end(),
                              [&](double a, double b) { return b - a < 1e-12 * eps; }),
                  targets.end());
    targets.back() = eps;

    auto rhs = [&](double t, const curves::State& y, curves::State& dy) {
        const geom::Vec p = make_point(t, xhat0 + y(0) * vhat);
        const double z = ascending_null_z(geom::metric_at(spec, p).g, vhat);
        dy.resize(1);
        dy(0) = ufrac(t) * z;
    };

    std::vector<CurveSample> samples;
    auto record = [&](double t, double xi) {
        const geom::Vec p = make_point(t, xhat0 + xi * vhat);
        const double z = ascending_null_z(geom::metric_at(spec, p).g, vhat);
        geom::Vec tangent(n);
        tangent(0) = 1.0;
        tangent.tail(sd) = (ufrac(t) * z) * vhat;
        samples.push_back(make_sample(spec, t, p, tangent));
    };

    curves::StepControl ctl;
    ctl.max_step = eps / 8.0;
    curves::State y(1);
    y(0) = 0.0;
    double t = 0.0;
    double h = eps / 64.0;
    record(0.0, 0.0);

    for (std::size_t i = 1; i < targets.size(); ++i) {
        const double tt = targets[i];
        long budget = 100000;
        while (t < tt - 1e-15 * eps) {
            if (--budget < 0) throw DomainError("leg integration exceeded its step budget");
            double h_try = std::min(h, tt - t);
            if (h_try < ctl.step_floor)
                throw StepSizeUnderflow("leg integration stalled at t = " + std::to_string(t));
            curves::rk45_try_step(rhs, t, y, h_try, ctl, nullptr, nullptr);
            h = h_try;
        }
        t = tt;
        record(tt, y(0));
    }
    *displacement = y(0);
    return CurvePath::sampled(std::move(samples));
}

LoopCertificate local_loop_at(const geom::MetricSpec& spec, const geom::Vec& q,
                              const LoopOptions& options, const char* kind) {
    const int sd = spec.dimension() - 1;
    const geom::RadicalReport rad = geom::radical_check(spec, q);
    if (rad.verdict != geom::RadicalVerdict::transverse)
        throw NonTransverseDegeneracy("degeneracy is not transverse at " + point_str(q));

    LoopCertificate cert;
    cert.kind = kind;
    cert.base_point = q;
    cert.cone_fraction = options.cone_fraction;

    ComparisonMetric comparison;
    cert.box = fit_box(spec, options.t0, q.tail(sd), options.xi0, options.grid_resolution,
                       &comparison);
    cert.G0 = comparison.G0;
    cert.apex = choose_apex(comparison, cert.box);

    const FanPair fans =
        integrate_fan_pair(spec, cert.apex, cert.box, options.cone_fraction);
    cert.crossings = {crossing_record(spec, fans.c1), crossing_record(spec, fans.c2)};

    cert.segments.push_back({SegmentRole::lorentzian_past, fans.past, std::nullopt});
    cert.segments.push_back({SegmentRole::riemannian_connector,
                             dip_connector(spec, fans.c1, fans.c2, 0.1 * cert.box.xi0),
                             std::nullopt});
    cert.segments.push_back({SegmentRole::lorentzian_future, fans.future, std::nullopt});
    finish_certificate(spec, &cert);
    return cert;
}

// Global loop, Lorentzian sector: the fans are seeded at p itself, so p is
// the endpoint self-intersection.
LoopCertificate global_lorentzian(const geom::MetricSpec& spec, const geom::Vec& p,
                                  const LoopOptions& options) {
    const int sd = spec.dimension() - 1;
    const double t_p = p(0);

    LoopCertificate cert;
    cert.kind = "global-lorentzian";
    cert.base_point = p;
    cert.cone_fraction = options.cone_fraction;

    ComparisonMetric comparison;
    cert.box = fit_box(spec, t_p, p.tail(sd), options.xi0, options.grid_resolution,
                       &comparison);
    cert.G0 = comparison.G0;
    cert.apex = p;

    for (int it = 1; it <= 5; ++it) {
        for (int jx = -1; jx <= 1; jx += 2) {
            geom::Vec xoff = geom::Vec::Zero(sd);
            xoff(0) = 0.7 * cert.box.xi0 * jx;
            const geom::Vec s = make_point(t_p * it / 5.0, geom::Vec(p.tail(sd) + xoff));
            if (geom::metric_at(spec, s).g(0, 0) >= 0.0)
                throw FoliationNotSpacelike("g(dt,dt) is not negative at " + point_str(s));
        }
    }

    const FanPair fans = integrate_fan_pair(spec, cert.apex, cert.box, options.cone_fraction);
    cert.crossings = {crossing_record(spec, fans.c1), crossing_record(spec, fans.c2)};
    cert.segments.push_back({SegmentRole::lorentzian_past, fans.past, std::nullopt});
    cert.segments.push_back({SegmentRole::riemannian_connector,
                             dip_connector(spec, fans.c1, fans.c2, 0.1 * cert.box.xi0),
                             std::nullopt});
    cert.segments.push_back({SegmentRole::lorentzian_future, fans.future, std::nullopt});
    finish_certificate(spec, &cert);

    IntersectionRecord base = cert.endpoint_intersection;
    base.sector = "lorentzian";
    cert.base_intersection = base;
    return cert;
}

// Global loop, hypersurface sector: two distinct timelike legs from p to a
// common apex above, joined below the hypersurface by a dip through p; the
// two visits of p carry the lightlike tangents -dt and +dt.
LoopCertificate global_hypersurface(const geom::MetricSpec& spec, const geom::Vec& p,
                                    const LoopOptions& options) {
    const int sd = spec.dimension() - 1;
    const geom::RadicalReport rad = geom::radical_check(spec, p);
    if (rad.verdict != geom::RadicalVerdict::transverse)
        throw NonTransverseDegeneracy("degeneracy is not transverse at " + point_str(p));

    const double eps = 0.5 * options.t0;
    const double f = options.cone_fraction;
    const double f1 = 0.5 * f;
    const double b_amp = 0.55 * f;
    const geom::Vec vhat = axis_direction(sd);
    const geom::Vec xhat_p = p.tail(sd);

    LoopCertificate cert;
    cert.kind = "global-hypersurface";
    cert.base_point = p;
    cert.cone_fraction = f;

    ComparisonMetric comparison;
    cert.box = fit_box(spec, eps, xhat_p, options.xi0, options.grid_resolution, &comparison);
    cert.G0 = comparison.G0;

    double d1 = 0.0;
    const CurvePath leg1 = integrate_ascending_leg(
        spec, xhat_p, vhat, eps, [&](double) { return f1; }, &d1);

    const double pi = 3.14159265358979323846;
    auto displacement_for = [&](double a, CurvePath* path) {
        double d3 = 0.0;
        CurvePath leg = integrate_ascending_leg(
            spec, xhat_p, vhat, eps,
            [&](double t) { return a - b_amp * std::cos(pi * t / eps); }, &d3);
        if (path) *path = std::move(leg);
        return d3;
    };

    double a0 = f1, a1 = 1.2 * f1 + 0.01;
    double d0 = displacement_for(a0, nullptr);
    double dv = displacement_for(a1, nullptr);
    for (int iter = 0; iter < 40 && std::fabs(dv - d1) > 1e-13 * (1.0 + std::fabs(d1));
         ++iter) {
        if (std::fabs(dv - d0) < 1e-300) throw DomainError("leg shooting stalled");
        const double a2 = a1 - (dv - d1) * (a1 - a0) / (dv - d0);
        a0 = a1;
        d0 = dv;
        a1 = a2;
        dv = displacement_for(a1, nullptr);
    }
    if (std::fabs(dv - d1) > 1e-10 * (1.0 + std::fabs(d1)))
        throw DomainError("leg shooting did not converge");
    if (std::max(std::fabs(a1 - b_amp), std::fabs(a1 + b_amp)) > 0.97 * f)
        throw DomainError("shot leg exceeds its cone-fraction budget");
    CurvePath leg3;
    displacement_for(a1, &leg3);

    // Dip into the Riemannian sector through p; the asymmetric second
    // harmonic keeps the tangent nonzero everywhere.
    const double depth = 0.1 * cert.box.xi0;
    const double rho = 0.25 * cert.box.xi0;
    auto dip = [&](double s, geom::Vec* point, geom::Vec* tangent) {
        const double t = -depth * (std::sin(pi * s) + 0.25 * std::sin(2.0 * pi * s));
        const double dt = -depth * pi * (std::cos(pi * s) + 0.5 * std::cos(2.0 * pi * s));
        const double sn = std::sin(pi * s);
        *point = make_point(t, xhat_p + (rho * sn * sn) * vhat);
        tangent->resize(sd + 1);
        (*tangent)(0) = dt;
        tangent->tail(sd) = (rho * pi * std::sin(2.0 * pi * s)) * vhat;
    };
    CurvePath connector = CurvePath::sampled(sample_arc(spec, 0.0, 257, dip));

    cert.apex = leg1.samples().back().point;
    cert.crossings = {crossing_record(spec, p), crossing_record(spec, p)};
    cert.segments.push_back({SegmentRole::lorentzian_past, leg1.reversed(), std::nullopt});
    cert.segments.push_back({SegmentRole::riemannian_connector, std::move(connector),
                             std::nullopt});
    cert.segments.push_back({SegmentRole::lorentzian_future, std::move(leg3), std::nullopt});
    finish_certificate(spec, &cert);

    IntersectionRecord base;
    base.point_first = cert.segments[0].path.samples().back().point;
    base.point_second = cert.segments[2].path.samples().front().point;
    base.tangent_first = cert.segments[0].path.samples().back().tangent;
    base.tangent_second = cert.segments[2].path.samples().front().tangent;
    base.g_first = metric_norm(spec, base.point_first, base.tangent_first);
    base.g_second = metric_norm(spec, base.point_second, base.tangent_second);
    base.positively_proportional =
        tangents_positively_proportional(base.tangent_first, base.tangent_second);
    base.sector = "hypersurface";
    cert.base_intersection = base;
    return cert;
}

// Global loop, Riemannian sector: a local loop at the hypersurface point
// above p, with the connector rerouted through p (visited twice: once
// arriving, once leaving a clockwise circle).
LoopCertificate global_riemannian(const geom::MetricSpec& spec, const geom::Vec& p,
                                  const LoopOptions& options) {
    const int sd = spec.dimension() - 1;
    const double t_p = p(0);
    const geom::Vec xhat_p = p.tail(sd);

    const geom::Vec top = make_point(options.t0, xhat_p);
    if (geom::metric_at(spec, top).signature != geom::Signature::lorentzian)
        throw InvalidArgument("t0 does not reach the Lorentzian sector above the base point");
    const geom::HypersurfacePoint hp = geom::locate_hypersurface(spec, p, top);

    LoopCertificate cert;
    cert.kind = "global-riemannian";
    cert.base_point = p;
    cert.cone_fraction = options.cone_fraction;

    const geom::RadicalReport rad = geom::radical_check(spec, hp.point);
    if (rad.verdict != geom::RadicalVerdict::transverse)
        throw NonTransverseDegeneracy("degeneracy is not transverse above the base point");

    ComparisonMetric comparison;
    cert.box = fit_box(spec, options.t0, xhat_p, options.xi0, options.grid_resolution,
                       &comparison);
    cert.G0 = comparison.G0;
    cert.apex = choose_apex(comparison, cert.box);

    const FanPair fans = integrate_fan_pair(spec, cert.apex, cert.box, options.cone_fraction);
    cert.crossings = {crossing_record(spec, fans.c1), crossing_record(spec, fans.c2)};

    const geom::Vec x1 = fans.c1.tail(sd);
    const geom::Vec x2 = fans.c2.tail(sd);
    geom::Vec vc = xhat_p - x1;
    const double leg_in = vc.norm();
    if (leg_in < 1e-12) throw CrossingsCoincide("fan crossing coincides with the base point");
    vc /= leg_in;

    const double kappa = std::max(2.0 * std::fabs(t_p), 0.1 * 3.14159265358979323846 * cert.box.xi0);
    const double r = std::min(0.2 * cert.box.xi0, 0.45 * std::fabs(t_p));
    const double pi = 3.14159265358979323846;

    // Arrives at p with tangent along vc (t' = 0 there, x' nonzero).
    auto arc1 = [&](double s, geom::Vec* point, geom::Vec* tangent) {
        const double t = -kappa * s * (1.0 - s) * (1.0 - s) + t_p * s * s * (3.0 - 2.0 * s);
        const double dt = -kappa * (1.0 - s) * (1.0 - 3.0 * s) + t_p * 6.0 * s * (1.0 - s);
        *point = make_point(t, x1 + (s * s) * (xhat_p - x1));
        tangent->resize(sd + 1);
        (*tangent)(0) = dt;
        tangent->tail(sd) = (2.0 * s) * (xhat_p - x1);
    };
    // Clockwise circle below p; both visits of p carry the tangent +vc.
    auto circle = [&](double s, geom::Vec* point, geom::Vec* tangent) {
        const double t = (t_p - r) + r * std::cos(2.0 * pi * s);
        *point = make_point(t, xhat_p + (r * std::sin(2.0 * pi * s)) * vc);
        tangent->resize(sd + 1);
        (*tangent)(0) = -2.0 * pi * r * std::sin(2.0 * pi * s);
        tangent->tail(sd) = (2.0 * pi * r * std::cos(2.0 * pi * s)) * vc;
    };
    // Leaves p along vc and climbs back to the second crossing.
    auto arc2 = [&](double s, geom::Vec* point, geom::Vec* tangent) {
        const double t = t_p * (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s) + kappa * s * s * (s - 1.0);
        const double dt = t_p * 6.0 * (s * s - s) + kappa * (3.0 * s * s - 2.0 * s);
        *point = make_point(t, xhat_p + (2.0 * s - s * s) * (x2 - xhat_p));
        tangent->resize(sd + 1);
        (*tangent)(0) = dt;
        tangent->tail(sd) = (2.0 - 2.0 * s) * (x2 - xhat_p);
    };

    std::vector<CurveSample> conn = sample_arc(spec, 0.0, 257, arc1);
    std::vector<CurveSample> piece = sample_arc(spec, 1.0, 257, circle);
    conn.insert(conn.end(), piece.begin() + 1, piece.end());
    piece = sample_arc(spec, 2.0, 257, arc2);
    conn.insert(conn.end(), piece.begin() + 1, piece.end());

    cert.segments.push_back({SegmentRole::lorentzian_past, fans.past, std::nullopt});
    cert.segments.push_back({SegmentRole::riemannian_connector,
                             CurvePath::sampled(std::move(conn)), std::nullopt});
    cert.segments.push_back({SegmentRole::lorentzian_future, fans.future, std::nullopt});
    finish_certificate(spec, &cert);

    IntersectionRecord base;
    geom::Vec pt, tg;
    arc1(1.0, &pt, &tg);
    base.point_first = pt;
    base.tangent_first = tg;
    circle(1.0, &pt, &tg);
    base.point_second = pt;
    base.tangent_second = tg;
    base.g_first = metric_norm(spec, base.point_first, base.tangent_first);
    base.g_second = metric_norm(spec, base.point_second, base.tangent_second);
    base.positively_proportional =
        tangents_positively_proportional(base.tangent_first, base.tangent_second);
    base.sector = "riemannian";
    cert.base_intersection = base;
    return cert;
}

}  // namespace

LoopCertificate build_local_loop(const geom::MetricSpec& spec, const geom::Vec& q,
                                 const LoopOptions& options) {
    if (!spec.normal_form())
        throw InvalidArgument("loop construction requires a normal-form chart");
    if (q.size() != spec.dimension()) throw InvalidArgument("base point has wrong dimension");
    validate_options(options);
    return local_loop_at(spec, q, options, "local");
}

LoopCertificate build_global_loop(const geom::MetricSpec& spec, const geom::Vec& p,
                                  const LoopOptions& options) {
    if (!spec.normal_form())
        throw InvalidArgument("loop construction requires a normal-form chart");
    if (p.size() != spec.dimension()) throw InvalidArgument("base point has wrong dimension");
    validate_options(options);
    switch (geom::metric_at(spec, p).signature) {
        case geom::Signature::lorentzian: return global_lorentzian(spec, p, options);
        case geom::Signature::degenerate: return global_hypersurface(spec, p, options);
        case geom::Signature::riemannian: return global_riemannian(spec, p, options);
    }
    throw InvalidArgument("unreachable");
}

namespace {

void push_item(ValidationReport* report, const std::string& name,
               const std::function<std::pair<bool, std::string>()>& check) {
    ValidationItem item;
    item.name = name;
    try {
        auto [pass, detail] = check();
        item.pass = pass;
        item.detail = detail;
    } catch (const std::exception& e) {
        item.pass = false;
        item.detail = std::string("exception: ") + e.what();
    }
    report->items.push_back(std::move(item));
}

std::string num_str(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

}  // namespace

ValidationReport validate_certificate(const geom::MetricSpec& spec,
                                      const LoopCertificate& cert) {
    ValidationReport report;

    bool structured = false;
    push_item(&report, "structure", [&]() -> std::pair<bool, std::string> {
        if (cert.segments.size() != 3) return {false, "expected 3 segments"};
        if (cert.segments[0].role != SegmentRole::lorentzian_past ||
            cert.segments[1].role != SegmentRole::riemannian_connector ||
            cert.segments[2].role != SegmentRole::lorentzian_future)
            return {false, "unexpected segment roles"};
        for (const LoopSegment& seg : cert.segments)
            if (seg.path.samples().size() < 2) return {false, "segment with fewer than 2 samples"};
        if (cert.crossings.size() != 2) return {false, "expected 2 hypersurface crossings"};
        if (cert.cone_fraction <= 0.0 || cert.cone_fraction >= 1.0)
            return {false, "cone fraction outside (0, 1)"};
        structured = true;
        return {true, "3 segments, 2 crossings"};
    });
    if (!structured) {
        report.all_pass = false;
        return report;
    }

    push_item(&report, "closure", [&]() -> std::pair<bool, std::string> {
        const double res = (cert.segments.front().path.samples().front().point -
                            cert.segments.back().path.samples().back().point)
                               .norm();
        return {res <= tol::kClosure, "residual " + num_str(res)};
    });

    push_item(&report, "chaining", [&]() -> std::pair<bool, std::string> {
        double worst = 0.0;
        for (std::size_t k = 0; k + 1 < cert.segments.size(); ++k) {
            const double gap = (cert.segments[k].path.samples().back().point -
                                cert.segments[k + 1].path.samples().front().point)
                                   .norm();
            worst = std::max(worst, gap);
        }
        return {worst <= tol::kClosure, "largest junction gap " + num_str(worst)};
    });

    push_item(&report, "crossing-degeneracy", [&]() -> std::pair<bool, std::string> {
        double worst = 0.0;
        for (const CrossingRecord& c : cert.crossings)
            worst = std::max(worst, std::fabs(geom::det_g(spec, c.point)));
        return {worst <= tol::kNullResidual, "largest |det g| " + num_str(worst)};
    });

    push_item(&report, "crossing-transversality", [&]() -> std::pair<bool, std::string> {
        for (const CrossingRecord& c : cert.crossings) {
            const geom::RadicalReport rad = geom::radical_check(spec, c.point);
            if (rad.verdict != geom::RadicalVerdict::transverse)
                return {false, std::string("verdict ") +
                                   geom::radical_verdict_name(rad.verdict) + " at " +
                                   point_str(c.point)};
        }
        return {true, "both crossings transverse"};
    });

    push_item(&report, "segment-roles", [&]() -> std::pair<bool, std::string> {
        for (const LoopSegment& seg : cert.segments) {
            const auto& samples = seg.path.samples();
            const bool connector = seg.role == SegmentRole::riemannian_connector;
            for (const CurveSample& s : samples) {
                if (connector && s.tag == SampleTag::lorentzian)
                    return {false, "Lorentzian sample inside the connector"};
                if (!connector && s.tag == SampleTag::riemannian)
                    return {false, "Riemannian sample inside a timelike segment"};
            }
            if (!connector) {
                const double sign = seg.role == SegmentRole::lorentzian_past ? -1.0 : 1.0;
                for (std::size_t k = 0; k + 1 < samples.size(); ++k)
                    if (sign * (samples[k + 1].point(0) - samples[k].point(0)) <= 0.0)
                        return {false, "coordinate time is not strictly monotone"};
            }
        }
        return {true, "tags and monotonicity consistent"};
    });

    push_item(&report, "timelike-classification", [&]() -> std::pair<bool, std::string> {
        for (const LoopSegment& seg : cert.segments) {
            if (seg.role == SegmentRole::riemannian_connector) continue;
            const gap::ClassificationOutcome out =
                gap::run_classification(spec, seg.path, {});
            if (out.report.verdict != gap::Verdict::pseudo_timelike)
                return {false, std::string("segment re-classified as ") +
                                   gap::verdict_name(out.report.verdict)};
            if (seg.classification &&
                seg.classification->verdict != out.report.verdict)
                return {false, "stored verdict disagrees with re-classification"};
        }
        return {true, "both timelike segments are pseudo-timelike"};
    });

    auto check_intersection = [&](const IntersectionRecord& rec,
                                  bool expect_at_base) -> std::pair<bool, std::string> {
        if ((rec.point_first - rec.point_second).norm() > tol::kClosure)
            return {false, "the two visits do not coincide"};
        if (expect_at_base && (rec.point_first - cert.base_point).norm() > tol::kClosure)
            return {false, "intersection is not at the base point"};
        if (rec.tangent_first.norm() == 0.0 || rec.tangent_second.norm() == 0.0)
            return {false, "vanishing tangent"};
        const double g1 = metric_norm(spec, rec.point_first, rec.tangent_first);
        const double g2 = metric_norm(spec, rec.point_second, rec.tangent_second);
        if (rec.sector == "lorentzian") {
            if (g1 >= 0.0 || g2 >= 0.0)
                return {false, "tangent not timelike: g values " + num_str(g1) + ", " +
                                   num_str(g2)};
        } else if (rec.sector == "hypersurface") {
            if (std::fabs(g1) > tol::kNullResidual || std::fabs(g2) > tol::kNullResidual)
                return {false, "tangent not lightlike: g values " + num_str(g1) + ", " +
                                   num_str(g2)};
        } else if (rec.sector == "riemannian") {
            if (g1 <= 0.0 || g2 <= 0.0)
                return {false, "tangent not spacelike: g values " + num_str(g1) + ", " +
                                   num_str(g2)};
        } else {
            return {false, "unknown sector '" + rec.sector + "'"};
        }
        const bool prop =
            tangents_positively_proportional(rec.tangent_first, rec.tangent_second);
        if (prop != rec.positively_proportional)
            return {false, "stored proportionality flag disagrees"};
        return {true, "sector " + rec.sector + ", g values " + num_str(g1) + ", " +
                          num_str(g2)};
    };

    push_item(&report, "endpoint-intersection", [&]() -> std::pair<bool, std::string> {
        return check_intersection(cert.endpoint_intersection, false);
    });

    if (cert.base_intersection) {
        push_item(&report, "base-intersection", [&]() -> std::pair<bool, std::string> {
            return check_intersection(*cert.base_intersection, true);
        });
    }

    push_item(&report, "loop-class", [&]() -> std::pair<bool, std::string> {
        const std::string expected = cert.endpoint_intersection.positively_proportional
                                         ? "closed-pseudo-timelike"
                                         : "loop";
        if (cert.loop_class != expected)
            return {false, "stored class '" + cert.loop_class + "', recomputed '" +
                               expected + "'"};
        return {true, "class '" + cert.loop_class + "'"};
    });

    report.all_pass = true;
    for (const ValidationItem& item : report.items) report.all_pass &= item.pass;
    return report;
}

}  // namespace sigloop::loops
