#include "sigloop/geometry/metric.hpp"

#include <cmath>

#include "sigloop/errors.hpp"
#include "sigloop/tolerances.hpp"

namespace sigloop::geom {

namespace {

std::size_t upper_index(int n, int i, int j) {
    // row-major position of (i, j), i <= j, within the packed upper triangle
    return static_cast<std::size_t>(i * n - i * (i - 1) / 2 + (j - i));
}

std::span<const double> as_span(const Vec& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

// Determinant of a matrix of duals by cofactor expansion (n <= 4).
dsl::Dual det_dual(const std::array<dsl::Dual, 16>& m, int n) {
    using dsl::Dual;
    auto at = [&](int i, int j) -> const Dual& { return m[static_cast<std::size_t>(4 * i + j)]; };
    if (n == 1) return at(0, 0);
    if (n == 2) return at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
    Dual sum = Dual::constant(0.0, at(0, 0).size());
    for (int j = 0; j < n; ++j) {
        std::array<Dual, 16> minor{};
        for (int r = 1; r < n; ++r) {
            int cc = 0;
            for (int c = 0; c < n; ++c) {
                if (c == j) continue;
                minor[static_cast<std::size_t>(4 * (r - 1) + cc)] = at(r, c);
                ++cc;
            }
        }
        Dual term = at(0, j) * det_dual(minor, n - 1);
        sum = (j % 2 == 0) ? sum + term : sum - term;
    }
    return sum;
}

dsl::Dual det_g_with_gradient(const MetricSpec& spec, const Vec& point) {
    const int n = spec.dimension();
    std::array<dsl::Dual, 16> m{};
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            dsl::Dual v = spec.component(i, j).evaluate_with_gradient(as_span(point));
            m[static_cast<std::size_t>(4 * i + j)] = v;
            m[static_cast<std::size_t>(4 * j + i)] = v;
        }
    }
    return det_dual(m, n);
}

}  // namespace

const char* signature_name(Signature s) {
    switch (s) {
        case Signature::riemannian: return "Riemannian";
        case Signature::lorentzian: return "Lorentzian";
        case Signature::degenerate: return "Degenerate";
    }
    return "?";
}

const char* radical_verdict_name(RadicalVerdict v) {
    switch (v) {
        case RadicalVerdict::transverse: return "transverse";
        case RadicalVerdict::tangent: return "tangent";
        case RadicalVerdict::indeterminate: return "indeterminate";
    }
    return "?";
}

MetricSpec MetricSpec::create(std::vector<std::string> coordinates,
                              const std::map<std::pair<int, int>, std::string>& components,
                              bool normal_form) {
    const int n = static_cast<int>(coordinates.size());
    if (n < 2) throw InvalidArgument("metric needs at least two coordinates");
    if (n > dsl::kMaxDim)
        throw InvalidArgument("metric supports at most " + std::to_string(dsl::kMaxDim) +
                              " coordinates");
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j)
            if (coordinates[static_cast<std::size_t>(i)] ==
                coordinates[static_cast<std::size_t>(j)])
                throw InvalidArgument("duplicate coordinate name '" +
                                      coordinates[static_cast<std::size_t>(i)] + "'");
    }

    MetricSpec spec;
    spec.coordinates_ = std::move(coordinates);
    spec.normal_form_ = normal_form;
    spec.upper_.resize(upper_index(n, n - 1, n - 1) + 1);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            auto it = components.find({i, j});
            std::string src;
            if (it != components.end()) {
                src = it->second;
            } else if (i == j) {
                throw InvalidArgument("missing diagonal metric component (" +
                                      spec.coordinates_[static_cast<std::size_t>(i)] + "," +
                                      spec.coordinates_[static_cast<std::size_t>(j)] + ")");
            } else {
                src = "0";
            }
            spec.upper_[upper_index(n, i, j)] = dsl::Expression::parse(src, spec.coordinates_);
        }
    }

    if (normal_form) {
        const dsl::Expression expected_tt =
            dsl::Expression::parse("-" + spec.coordinates_[0], spec.coordinates_);
        const dsl::Expression zero = dsl::Expression::parse("0", spec.coordinates_);
        if (!spec.component(0, 0).equals(expected_tt))
            throw InvalidArgument("normal form requires g_00 to be -" + spec.coordinates_[0]);
        for (int j = 1; j < n; ++j)
            if (!spec.component(0, j).equals(zero))
                throw InvalidArgument("normal form requires vanishing g_0j components");
    }
    return spec;
}

const dsl::Expression& MetricSpec::component(int i, int j) const {
    if (i > j) std::swap(i, j);
    return upper_[upper_index(dimension(), i, j)];
}

bool MetricSpec::is_constant() const {
    for (const auto& e : upper_)
        if (!e.is_constant()) return false;
    return true;
}

MetricValue metric_at(const MetricSpec& spec, const Vec& point) {
    const int n = spec.dimension();
    if (point.size() != n) throw InvalidArgument("point dimension mismatch");
    MetricValue out;
    out.point = point;
    out.g.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = spec.component(i, j).evaluate(as_span(point));
            out.g(i, j) = v;
            out.g(j, i) = v;
        }
    out.det = out.g.determinant();

    Eigen::SelfAdjointEigenSolver<Mat> es(out.g, Eigen::EigenvaluesOnly);
    out.eigenvalues = es.eigenvalues();

    int negatives = 0, zeros = 0;
    for (int i = 0; i < n; ++i) {
        double ev = out.eigenvalues(i);
        if (std::fabs(ev) <= tol::kSigma)
            ++zeros;
        else if (ev < 0.0)
            ++negatives;
    }
    if (zeros > 0)
        out.signature = Signature::degenerate;
    else if (negatives == 1)
        out.signature = Signature::lorentzian;
    else if (negatives == 0)
        out.signature = Signature::riemannian;
    else
        throw UnsupportedSignature("metric has " + std::to_string(negatives) +
                                   " negative eigenvalues at a chart point");
    return out;
}

ChristoffelValue christoffel_at(const MetricSpec& spec, const Vec& point) {
    const int n = spec.dimension();
    if (point.size() != n) throw InvalidArgument("point dimension mismatch");
    ChristoffelValue out;
    out.point = point;
    out.g.resize(n, n);
    for (int k = 0; k < n; ++k) out.dg[static_cast<std::size_t>(k)].setZero(n, n);

    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            dsl::Dual v = spec.component(i, j).evaluate_with_gradient(as_span(point));
            out.g(i, j) = v.value();
            out.g(j, i) = v.value();
            for (int k = 0; k < n; ++k) {
                out.dg[static_cast<std::size_t>(k)](i, j) = v.partial(k);
                out.dg[static_cast<std::size_t>(k)](j, i) = v.partial(k);
            }
        }
    }

    const double det = out.g.determinant();
    if (std::fabs(det) <= tol::kInversion)
        throw DegenerateMetric("refusing metric inversion, |det g| = " + std::to_string(det));
    out.g_inv = out.g.inverse();

    for (int l = 0; l < n; ++l) {
        Mat& gl = out.gamma[static_cast<std::size_t>(l)];
        gl.setZero(n, n);
        for (int m = 0; m < n; ++m)
            for (int nu = m; nu < n; ++nu) {
                double sum = 0.0;
                for (int s = 0; s < n; ++s) {
                    sum += out.g_inv(l, s) *
                           (out.dg[static_cast<std::size_t>(m)](nu, s) +
                            out.dg[static_cast<std::size_t>(nu)](m, s) -
                            out.dg[static_cast<std::size_t>(s)](m, nu));
                }
                gl(m, nu) = 0.5 * sum;
                gl(nu, m) = gl(m, nu);
            }
    }
    return out;
}

double det_g(const MetricSpec& spec, const Vec& point) {
    const int n = spec.dimension();
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = spec.component(i, j).evaluate(as_span(point));
            g(i, j) = v;
            g(j, i) = v;
        }
    return g.determinant();
}

Vec det_g_gradient(const MetricSpec& spec, const Vec& point) {
    dsl::Dual d = det_g_with_gradient(spec, point);
    Vec grad(spec.dimension());
    for (int k = 0; k < spec.dimension(); ++k) grad(k) = d.partial(k);
    return grad;
}

HypersurfacePoint locate_hypersurface(const MetricSpec& spec, const Vec& a, const Vec& b) {
    if (a.size() != spec.dimension() || b.size() != spec.dimension())
        throw InvalidArgument("segment endpoint dimension mismatch");
    auto f = [&](double s) { return det_g(spec, a + s * (b - a)); };
    double fa = f(0.0);
    double fb = f(1.0);
    if (fa == 0.0 || fb == 0.0 || fa * fb > 0.0)
        throw NoSignChange("det g does not change sign across the segment");

    double lo = 0.0, hi = 1.0, flo = fa;
    while (hi - lo > tol::kStepFloor) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) {
            lo = hi = mid;
            break;
        }
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }

    double s = 0.5 * (lo + hi);
    Vec dir = b - a;
    // one Newton polish with the dual-number directional derivative
    {
        Vec q = a + s * dir;
        dsl::Dual d = det_g_with_gradient(spec, q);
        double slope = 0.0;
        for (int k = 0; k < spec.dimension(); ++k) slope += d.partial(k) * dir(k);
        if (slope != 0.0) {
            double s2 = s - d.value() / slope;
            if (s2 > 0.0 && s2 < 1.0) s = s2;
        }
    }

    HypersurfacePoint out;
    out.s = s;
    out.point = a + s * dir;
    dsl::Dual d = det_g_with_gradient(spec, out.point);
    out.det = d.value();
    out.det_gradient.resize(spec.dimension());
    for (int k = 0; k < spec.dimension(); ++k) out.det_gradient(k) = d.partial(k);

    const double slope = out.det_gradient.dot(dir);
    const double scale = std::max(std::fabs(fa), std::fabs(fb));
    if (std::fabs(slope) < tol::kTransversality * scale)
        throw NonTransverseDegeneracy("det g has vanishing directional derivative at its root");
    return out;
}

RadicalReport radical_check(const MetricSpec& spec, const Vec& point) {
    MetricValue m = metric_at(spec, point);
    if (std::fabs(m.det) >= tol::kKernel)
        throw NotOnHypersurface("det g = " + std::to_string(m.det) + " at the queried point");

    Eigen::SelfAdjointEigenSolver<Mat> es(m.g);
    const Vec evs = es.eigenvalues();
    int kmin = 0;
    for (int i = 1; i < spec.dimension(); ++i)
        if (std::fabs(evs(i)) < std::fabs(evs(kmin))) kmin = i;

    // rank deficit >= 2 means the degeneracy is not transverse type-changing
    int near_zero = 0;
    for (int i = 0; i < spec.dimension(); ++i)
        if (std::fabs(evs(i)) <= tol::kKernel) ++near_zero;
    if (near_zero >= 2)
        throw NonTransverseDegeneracy("metric kernel has dimension >= 2 at the queried point");

    RadicalReport out;
    out.point = point;
    out.kernel = es.eigenvectors().col(kmin);
    out.det_gradient = det_g_gradient(spec, point);
    out.indicator = out.det_gradient.dot(out.kernel);

    const double gnorm = out.det_gradient.norm();
    const double knorm = (m.g * out.kernel).norm();
    if (gnorm < tol::kKernel || knorm > tol::kKernel) {
        out.verdict = RadicalVerdict::indeterminate;
    } else if (std::fabs(out.indicator) > tol::kTransversality * gnorm) {
        out.verdict = RadicalVerdict::transverse;
    } else {
        out.verdict = RadicalVerdict::tangent;
    }
    return out;
}

}  // namespace sigloop::geom
