#include "sigloop/curves/curve.hpp"

#include <algorithm>
#include <cmath>

#include "sigloop/errors.hpp"

namespace sigloop::curves {

const char* sample_tag_name(SampleTag tag) {
    switch (tag) {
        case SampleTag::lorentzian: return "lorentzian";
        case SampleTag::riemannian: return "riemannian";
        case SampleTag::on_h: return "on_h";
    }
    return "?";
}

void SymbolicCurve::eval(double u, geom::Vec* point, geom::Vec* tangent) const {
    const int n = static_cast<int>(components.size());
    if (point != nullptr) point->resize(n);
    if (tangent != nullptr) tangent->resize(n);
    const double args[1] = {u};
    for (int i = 0; i < n; ++i) {
        if (tangent != nullptr) {
            dsl::Dual d = components[i].evaluate_with_gradient(args);
            if (point != nullptr) (*point)(i) = d.value();
            (*tangent)(i) = d.partial(0);
        } else {
            (*point)(i) = components[i].evaluate(args);
        }
    }
}

CurvePath CurvePath::symbolic(SymbolicCurve curve) {
    if (curve.components.empty()) throw InvalidArgument("curve has no components");
    if (!(curve.a < curve.b)) throw InvalidArgument("curve domain must satisfy a < b");
    CurvePath path;
    path.symbolic_ = std::move(curve);
    return path;
}

CurvePath CurvePath::sampled(std::vector<CurveSample> samples) {
    if (samples.size() < 2) throw InvalidArgument("sampled curve needs at least two samples");
    const int n = static_cast<int>(samples.front().point.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        if (samples[k].point.size() != n || samples[k].tangent.size() != n)
            throw InvalidArgument("inconsistent sample dimensions");
        if (k > 0 && !(samples[k - 1].u < samples[k].u))
            throw InvalidArgument("sample parameters must be strictly increasing");
    }
    CurvePath path;
    path.samples_ = std::move(samples);
    return path;
}

double CurvePath::a() const { return is_symbolic() ? symbolic_.a : samples_.front().u; }

double CurvePath::b() const { return is_symbolic() ? symbolic_.b : samples_.back().u; }

int CurvePath::dimension() const {
    return is_symbolic() ? static_cast<int>(symbolic_.components.size())
                         : static_cast<int>(samples_.front().point.size());
}

void CurvePath::eval(double u, geom::Vec* point, geom::Vec* tangent) const {
    if (is_symbolic()) {
        symbolic_.eval(u, point, tangent);
        return;
    }
    // Cubic Hermite interpolation between the bracketing samples.
    const auto upper = std::upper_bound(
        samples_.begin(), samples_.end(), u,
        [](double value, const CurveSample& s) { return value < s.u; });
    std::size_t hi = static_cast<std::size_t>(upper - samples_.begin());
    if (hi == 0) hi = 1;
    if (hi == samples_.size()) hi = samples_.size() - 1;
    const CurveSample& s0 = samples_[hi - 1];
    const CurveSample& s1 = samples_[hi];
    const double h = s1.u - s0.u;
    const double s = (u - s0.u) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    if (point != nullptr)
        *point = h00 * s0.point + (h10 * h) * s0.tangent + h01 * s1.point + (h11 * h) * s1.tangent;
    if (tangent != nullptr) {
        const double d00 = 6 * s * (s - 1) / h;
        const double d10 = (1 - s) * (1 - 3 * s);
        const double d01 = -6 * s * (s - 1) / h;
        const double d11 = s * (3 * s - 2);
        *tangent = d00 * s0.point + d10 * s0.tangent + d01 * s1.point + d11 * s1.tangent;
    }
}

CurvePath CurvePath::reversed() const {
    if (is_symbolic())
        throw InvalidArgument("cannot reverse a symbolic curve; sample it first");
    std::vector<CurveSample> rev(samples_.rbegin(), samples_.rend());
    const double a0 = samples_.front().u;
    const double b0 = samples_.back().u;
    for (auto& s : rev) {
        s.u = a0 + b0 - s.u;
        s.tangent = -s.tangent;
    }
    return CurvePath::sampled(std::move(rev));
}

std::vector<double> uniform_grid(double a, double b, int count) {
    if (count < 2) throw InvalidArgument("grid needs at least two points");
    if (!(a < b)) throw InvalidArgument("grid bounds must satisfy a < b");
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
        grid[static_cast<std::size_t>(k)] = a + (b - a) * k / (count - 1);
    grid.back() = b;
    return grid;
}

std::vector<CurveSample> sample_curve(const geom::MetricSpec& spec, const CurvePath& curve,
                                      const std::vector<double>& grid) {
    std::vector<CurveSample> out;
    out.reserve(grid.size());
    for (double u : grid) {
        CurveSample s;
        s.u = u;
        curve.eval(u, &s.point, &s.tangent);
        const geom::MetricValue mv = geom::metric_at(spec, s.point);
        s.det_g = mv.det;
        switch (mv.signature) {
            case geom::Signature::lorentzian: s.tag = SampleTag::lorentzian; break;
            case geom::Signature::riemannian: s.tag = SampleTag::riemannian; break;
            case geom::Signature::degenerate: s.tag = SampleTag::on_h; break;
        }
        out.push_back(std::move(s));
    }
    return out;
}

CurvePath sample_symbolic_curve(const geom::MetricSpec& spec, const SymbolicCurve& curve,
                                int sample_count) {
    return CurvePath::sampled(sample_curve(spec, CurvePath::symbolic(curve),
                                           uniform_grid(curve.a, curve.b, sample_count)));
}

}  // namespace sigloop::curves
