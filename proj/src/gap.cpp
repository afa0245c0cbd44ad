#include "sigloop/gap/gap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sigloop/errors.hpp"

namespace sigloop::gap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Integral over [a, b] of the quadratic through (x0,f0), (x1,f1), (x2,f2),
// in Newton form.
double quadratic_integral(double x0, double x1, double x2, double f0, double f1, double f2,
                          double a, double b) {
    const double d01 = (f1 - f0) / (x1 - x0);
    const double d12 = (f2 - f1) / (x2 - x1);
    const double d012 = (d12 - d01) / (x2 - x0);
    // p(x) = f0 + d01*(x - x0) + d012*(x - x0)*(x - x1)
    auto antiderivative = [&](double x) {
        const double y0 = x - x0;
        return f0 * x + 0.5 * d01 * y0 * y0 +
               d012 * (x * x * x / 3.0 - 0.5 * (x0 + x1) * x * x + x0 * x1 * x);
    };
    return antiderivative(b) - antiderivative(a);
}

// Cumulative composite Simpson on a nonuniform grid: each interval gets the
// mean of the two bracketing three-point quadratic estimates.
std::vector<double> cumulative_integral(const std::vector<double>& x,
                                        const std::vector<double>& f) {
    const std::size_t m = x.size();
    std::vector<double> acc(m, 0.0);
    if (m < 2) return acc;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        double left = kNaN, right = kNaN;
        if (k >= 1)
            left = quadratic_integral(x[k - 1], x[k], x[k + 1], f[k - 1], f[k], f[k + 1],
                                      x[k], x[k + 1]);
        if (k + 2 < m)
            right = quadratic_integral(x[k], x[k + 1], x[k + 2], f[k], f[k + 1], f[k + 2],
                                       x[k], x[k + 1]);
        double part;
        if (std::isnan(left))
            part = std::isnan(right) ? 0.5 * (f[k] + f[k + 1]) * (x[k + 1] - x[k]) : right;
        else if (std::isnan(right))
            part = left;
        else
            part = 0.5 * (left + right);
        acc[k + 1] = acc[k] + part;
    }
    return acc;
}

// Neville extrapolation of (x_i, y_i) to x = 0.
double neville_at_zero(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::vector<double> p = ys;
    const std::size_t m = xs.size();
    for (std::size_t level = 1; level < m; ++level) {
        for (std::size_t i = 0; i + level < m; ++i) {
            const double xi = xs[i];
            const double xj = xs[i + level];
            p[i] = ((0.0 - xj) * p[i] - (0.0 - xi) * p[i + 1]) / (xi - xj);
        }
    }
    return p.empty() ? kNaN : p[0];
}

curves::SampleTag tag_of(geom::Signature s) {
    switch (s) {
        case geom::Signature::lorentzian: return curves::SampleTag::lorentzian;
        case geom::Signature::riemannian: return curves::SampleTag::riemannian;
        case geom::Signature::degenerate: break;
    }
    return curves::SampleTag::on_h;
}

}  // namespace

GapParametrization compute_gap(const geom::MetricSpec& spec, const curves::CurvePath& curve,
                               const curves::ParallelFrame& frame) {
    if (frame.samples.size() < 2) throw SingularFrame("frame covers fewer than two samples");

    GapParametrization gap;
    gap.u0 = frame.u0;
    gap.samples.reserve(frame.samples.size());

    std::vector<double> us, ws;
    for (const curves::FrameSample& fs : frame.samples) {
        if (std::fabs(fs.frame.determinant()) <= tol::kFrameDet)
            throw SingularFrame("frame is not a basis at a retained sample");
        geom::Vec point, tangent;
        curve.eval(fs.u, &point, &tangent);
        const geom::Vec V = fs.frame.fullPivLu().solve(tangent);
        const double resid = (fs.frame * V - tangent).norm() / (1.0 + tangent.norm());
        if (resid > 1e-8) throw SingularFrame("tangent reconstruction failed in the frame");
        const double w = V.norm();
        if (!(w > 0.0) || !std::isfinite(w))
            throw InvalidArgument("curve tangent vanishes at a sample");

        const geom::MetricValue mv = geom::metric_at(spec, point);
        GapSample s;
        s.u = fs.u;
        s.w = w;
        s.V = V;
        s.det_g = mv.det;
        s.tag = tag_of(mv.signature);
        const double gvv = tangent.dot(mv.g * tangent);
        s.q = s.tag == curves::SampleTag::lorentzian ? gvv / (w * w) : kNaN;
        s.frame = fs.frame;
        gap.samples.push_back(std::move(s));
        us.push_back(fs.u);
        ws.push_back(w);
    }

    const std::vector<double> acc = cumulative_integral(us, ws);

    std::size_t k0 = gap.samples.size();
    for (std::size_t k = 0; k < us.size(); ++k)
        if (std::fabs(us[k] - frame.u0) <= 1e-9) {
            k0 = k;
            break;
        }
    if (k0 == gap.samples.size())
        throw InvalidArgument("frame anchor parameter is not among the samples");
    for (std::size_t k = 0; k < acc.size(); ++k) gap.samples[k].mu = acc[k] - acc[k0];

    // Same quadrature on every other sample; the difference bounds the error.
    if (us.size() >= 5) {
        std::vector<double> xs, fs;
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < us.size(); k += 2) {
            xs.push_back(us[k]);
            fs.push_back(ws[k]);
            idx.push_back(k);
        }
        if (idx.back() != us.size() - 1) {
            xs.push_back(us.back());
            fs.push_back(ws.back());
            idx.push_back(us.size() - 1);
        }
        const std::vector<double> half = cumulative_integral(xs, fs);
        double err = 0.0;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const double full_val = acc[idx[j]] - acc[0];
            err = std::max(err, std::fabs(full_val - half[j]) / 15.0);
        }
        gap.richardson_error = err;
    }
    return gap;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pseudo_timelike: return "pseudo-timelike";
        case Verdict::pseudo_spacelike: return "pseudo-spacelike";
        case Verdict::pseudo_lightlike: return "pseudo-lightlike";
        case Verdict::asymptotically_lightlike: return "asymptotically-lightlike";
        case Verdict::mixed_unclassified: return "mixed/unclassified";
        case Verdict::pseudo_timelike_vacuous: return "pseudo-timelike-vacuous";
    }
    return "?";
}

namespace {

// Geometric subsequence of Lorentzian samples walking inward from one end,
// used as extrapolation abscissae |det g| -> 0.
std::optional<double> extrapolate_limit(const std::vector<GapSample>& samples, bool from_right) {
    std::vector<double> xs, ys;
    const std::size_t m = samples.size();
    double last_abs = -1.0;
    for (std::size_t step = 0; step < m && xs.size() < 5; ++step) {
        const GapSample& s = samples[from_right ? m - 1 - step : step];
        if (s.tag != curves::SampleTag::lorentzian || std::isnan(s.q)) continue;
        const double a = std::fabs(s.det_g);
        if (a <= 0.0) continue;
        if (last_abs > 0.0 && a < 1.8 * last_abs) continue;
        xs.push_back(a);
        ys.push_back(s.q);
        last_abs = a;
    }
    if (xs.size() < 3) {
        xs.clear();
        ys.clear();
        for (std::size_t step = 0; step < m && xs.size() < 3; ++step) {
            const GapSample& s = samples[from_right ? m - 1 - step : step];
            if (s.tag != curves::SampleTag::lorentzian || std::isnan(s.q)) continue;
            xs.push_back(std::fabs(s.det_g));
            ys.push_back(s.q);
        }
    }
    if (xs.size() < 2) return std::nullopt;
    return neville_at_zero(xs, ys);
}

}  // namespace

ClassificationReport classify(const geom::MetricSpec& spec, const curves::CurvePath& curve,
                              const curves::ParallelFrame& frame, double threshold) {
    const GapParametrization gap = compute_gap(spec, curve, frame);
    const std::vector<GapSample>& ss = gap.samples;

    ClassificationReport rep;
    rep.threshold = threshold;

    double max_abs_det = 0.0;
    for (const GapSample& s : ss) max_abs_det = std::max(max_abs_det, std::fabs(s.det_g));

    rep.approaches_left = ss.front().u > curve.a() + 1e-9 ||
                          std::fabs(ss.front().det_g) < 0.01 * max_abs_det;
    rep.approaches_right = ss.back().u < curve.b() - 1e-9 ||
                           std::fabs(ss.back().det_g) < 0.01 * max_abs_det;

    bool any_lorentzian = false;
    rep.sup_q = -std::numeric_limits<double>::infinity();
    rep.inf_q = std::numeric_limits<double>::infinity();
    for (const GapSample& s : ss) {
        if (s.tag != curves::SampleTag::lorentzian || std::isnan(s.q)) continue;
        any_lorentzian = true;
        rep.sup_q = std::max(rep.sup_q, s.q);
        rep.inf_q = std::min(rep.inf_q, s.q);
        rep.q_mu.emplace_back(s.mu, s.q);
    }

    if (rep.approaches_left) rep.limit_left = extrapolate_limit(ss, false);
    if (rep.approaches_right) rep.limit_right = extrapolate_limit(ss, true);

    std::vector<double> limits;
    if (rep.limit_left) limits.push_back(*rep.limit_left);
    if (rep.limit_right) limits.push_back(*rep.limit_right);

    for (std::size_t k = 0; k < ss.size();) {
        SegmentDiagnostic seg;
        seg.tag = ss[k].tag;
        seg.u_begin = ss[k].u;
        seg.q_min = std::numeric_limits<double>::infinity();
        seg.q_max = -std::numeric_limits<double>::infinity();
        while (k < ss.size() && ss[k].tag == seg.tag) {
            seg.u_end = ss[k].u;
            ++seg.count;
            if (!std::isnan(ss[k].q)) {
                seg.q_min = std::min(seg.q_min, ss[k].q);
                seg.q_max = std::max(seg.q_max, ss[k].q);
            }
            ++k;
        }
        rep.segments.push_back(seg);
    }

    if (!any_lorentzian) {
        rep.verdict = Verdict::pseudo_timelike_vacuous;
        rep.sup_q = kNaN;
        rep.inf_q = kNaN;
        return rep;
    }

    const bool all_small = std::fabs(rep.sup_q) < threshold && std::fabs(rep.inf_q) < threshold &&
                           std::all_of(limits.begin(), limits.end(), [&](double L) {
                               return std::fabs(L) < threshold;
                           });
    const bool limits_below = std::all_of(limits.begin(), limits.end(),
                                          [&](double L) { return L < -threshold; });
    const bool limits_above = std::all_of(limits.begin(), limits.end(),
                                          [&](double L) { return L > threshold; });

    if (all_small) {
        rep.verdict = Verdict::pseudo_lightlike;
        double worst = std::max(std::fabs(rep.sup_q), std::fabs(rep.inf_q));
        rep.margin = threshold - worst;
    } else if (rep.sup_q < -threshold && limits_below) {
        rep.verdict = Verdict::pseudo_timelike;
        rep.margin = -rep.sup_q;
        for (double L : limits) rep.margin = std::min(rep.margin, -L);
    } else if (rep.inf_q > threshold && limits_above) {
        rep.verdict = Verdict::pseudo_spacelike;
        rep.margin = rep.inf_q;
        for (double L : limits) rep.margin = std::min(rep.margin, L);
    } else if (rep.sup_q < 0.0 && !limits.empty() &&
               *std::max_element(limits.begin(), limits.end()) >= -threshold) {
        rep.verdict = Verdict::asymptotically_lightlike;
        rep.margin = -*std::max_element(limits.begin(), limits.end());
    } else {
        rep.verdict = Verdict::mixed_unclassified;
        rep.margin = 0.0;
    }
    return rep;
}

InvarianceReport check_basis_invariance(const GapParametrization& gapA,
                                        const GapParametrization& gapB,
                                        const geom::Mat& frame_change) {
    const int n = static_cast<int>(frame_change.rows());
    if (frame_change.cols() != n) throw InvalidArgument("frame change must be square");
    const double detB = frame_change.determinant();
    if (std::fabs(detB) < 1e-12) throw FramesNotRelated("frame change is singular");
    const geom::Mat Binv = frame_change.inverse();

    InvarianceReport rep;
    rep.c1 = 1.0 / (n * Binv.cwiseAbs().maxCoeff());
    rep.c2 = n * frame_change.cwiseAbs().maxCoeff();
    rep.worst_lower_slack = std::numeric_limits<double>::infinity();
    rep.worst_upper_slack = std::numeric_limits<double>::infinity();

    std::size_t ia = 0, ib = 0;
    while (ia < gapA.samples.size() && ib < gapB.samples.size()) {
        const GapSample& a = gapA.samples[ia];
        const GapSample& b = gapB.samples[ib];
        if (a.u < b.u - 1e-12) {
            ++ia;
            continue;
        }
        if (b.u < a.u - 1e-12) {
            ++ib;
            continue;
        }
        const geom::Mat expected = a.frame * frame_change;
        const double resid =
            (b.frame - expected).cwiseAbs().maxCoeff() / (1.0 + expected.cwiseAbs().maxCoeff());
        rep.max_frame_residual = std::max(rep.max_frame_residual, resid);
        if (resid > 1e-6)
            throw FramesNotRelated("frames are not related by the given constant matrix");

        const double slack = 1e-9 * (1.0 + std::fabs(a.mu));
        rep.worst_lower_slack = std::min(rep.worst_lower_slack, a.mu - rep.c1 * b.mu + slack);
        rep.worst_upper_slack = std::min(rep.worst_upper_slack, rep.c2 * b.mu - a.mu + slack);
        ++rep.compared_samples;
        ++ia;
        ++ib;
    }
    if (rep.compared_samples == 0) throw FramesNotRelated("no common samples to compare");
    rep.ok = rep.worst_lower_slack >= 0.0 && rep.worst_upper_slack >= 0.0;
    return rep;
}

geom::Mat default_frame(const geom::MetricSpec& spec, const geom::Vec& point) {
    const geom::MetricValue mv = geom::metric_at(spec, point);
    if (mv.signature == geom::Signature::degenerate)
        throw SingularFrame("cannot anchor a frame at a degenerate point");
    const int n = spec.dimension();
    geom::Mat frame = geom::Mat::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        geom::Vec b = frame.col(i);
        for (int j = 0; j < i; ++j) {
            const geom::Vec bj = frame.col(j);
            const double njj = bj.dot(mv.g * bj);
            b -= (b.dot(mv.g * bj) / njj) * bj;
        }
        const double nb = b.dot(mv.g * b);
        if (std::fabs(nb) < 1e-10)
            throw SingularFrame("coordinate basis cannot be orthonormalized here");
        frame.col(i) = b / std::sqrt(std::fabs(nb));
    }
    return frame;
}

ClassificationOutcome run_classification(const geom::MetricSpec& spec,
                                         const curves::CurvePath& curve,
                                         const ClassifyOptions& options) {
    ClassificationOutcome out;

    if (curve.is_symbolic()) {
        if (options.sample_count < 9) throw InvalidArgument("sample count too small");
        out.grid = curves::uniform_grid(curve.a(), curve.b(), options.sample_count);
        const double base = 0.05 * (curve.b() - curve.a());
        for (int j = 1; j <= 8; ++j) {
            out.grid.push_back(curve.a() + base * std::pow(0.5, j));
            out.grid.push_back(curve.b() - base * std::pow(0.5, j));
        }
    } else {
        for (const curves::CurveSample& s : curve.samples()) out.grid.push_back(s.u);
    }
    for (double u : options.extra_params) {
        if (u < curve.a() - 1e-12 || u > curve.b() + 1e-12)
            throw InvalidArgument("forced parameter outside the curve interval");
        out.grid.push_back(u);
    }
    std::sort(out.grid.begin(), out.grid.end());
    out.grid.erase(std::unique(out.grid.begin(), out.grid.end(),
                               [](double a, double b) { return std::fabs(a - b) < 1e-12; }),
                   out.grid.end());

    bool found = false;
    for (double u : out.grid) {
        geom::Vec p;
        curve.eval(u, &p, nullptr);
        if (std::fabs(geom::det_g(spec, p)) >= 10.0 * tol::kDetFloor) {
            out.u0 = u;
            found = true;
            break;
        }
    }
    if (!found) throw SingularFrame("no nondegenerate sample to anchor the frame");

    geom::Mat frame0;
    if (options.initial_frame) {
        frame0 = *options.initial_frame;
    } else {
        geom::Vec p0;
        curve.eval(out.u0, &p0, nullptr);
        frame0 = default_frame(spec, p0);
    }

    out.frame = curves::integrate_transport(spec, curve, frame0, out.u0, out.grid);
    out.gap = compute_gap(spec, curve, out.frame);
    out.report = classify(spec, curve, out.frame, options.threshold);
    return out;
}

}  // namespace sigloop::gap
