#ifndef SIGLOOP_GEOMETRY_METRIC_HPP
#define SIGLOOP_GEOMETRY_METRIC_HPP

#include <Eigen/Dense>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "sigloop/dsl/expression.hpp"

namespace sigloop::geom {

// Chart dimension is at most dsl::kMaxDim; fixed-capacity Eigen types keep
// the hot paths allocation-free.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, dsl::kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, dsl::kMaxDim,
                          dsl::kMaxDim>;

enum class Signature { riemannian, lorentzian, degenerate };

const char* signature_name(Signature s);

// A symmetric metric over one chart, each component a scalar expression in
// the coordinates.  Only the upper triangle is stored.  The first coordinate
// is the distinguished time coordinate; when normal_form is set, g_00 must be
// literally the negated first coordinate and g_0j must vanish.
class MetricSpec {
public:
    // components maps (i, j) with i <= j to expression source strings;
    // omitted off-diagonal entries default to 0, diagonal entries are
    // required.
    static MetricSpec create(std::vector<std::string> coordinates,
                             const std::map<std::pair<int, int>, std::string>& components,
                             bool normal_form);

    int dimension() const { return static_cast<int>(coordinates_.size()); }
    const std::vector<std::string>& coordinates() const { return coordinates_; }
    bool normal_form() const { return normal_form_; }

    const dsl::Expression& component(int i, int j) const;
    std::string component_source(int i, int j) const { return component(i, j).print(); }

    // True when no component references a coordinate.
    bool is_constant() const;

private:
    std::vector<std::string> coordinates_;
    std::vector<dsl::Expression> upper_;  // row-major upper triangle
    bool normal_form_ = false;
};

struct MetricValue {
    Vec point;
    Mat g;
    double det = 0.0;
    Signature signature = Signature::degenerate;
    Vec eigenvalues;  // ascending
};

struct ChristoffelValue {
    Vec point;
    Mat g;
    Mat g_inv;
    // dg[k](i, j) = d g_ij / d x^k
    std::array<Mat, dsl::kMaxDim> dg;
    // gamma[l](m, n) = Gamma^l_mn
    std::array<Mat, dsl::kMaxDim> gamma;
};

struct HypersurfacePoint {
    Vec point;
    double det = 0.0;
    Vec det_gradient;
    double s = 0.0;  // location within the probed segment
};

enum class RadicalVerdict { transverse, tangent, indeterminate };

const char* radical_verdict_name(RadicalVerdict v);

struct RadicalReport {
    Vec point;
    Vec kernel;        // unit kernel vector of g at the point
    Vec det_gradient;  // d(det g) at the point
    double indicator = 0.0;  // <d(det g), kernel>
    RadicalVerdict verdict = RadicalVerdict::indeterminate;
};

// Pointwise metric with determinant, eigenvalues, and signature tag.
MetricValue metric_at(const MetricSpec& spec, const Vec& point);

// Levi-Civita connection coefficients from dual-number metric derivatives.
// Refuses inversion when |det g| <= tol::kInversion.
ChristoffelValue christoffel_at(const MetricSpec& spec, const Vec& point);

// det g alone (fast path for integrator callbacks).
double det_g(const MetricSpec& spec, const Vec& point);

// Gradient of det g via dual numbers.
Vec det_g_gradient(const MetricSpec& spec, const Vec& point);

// Root of det g on the straight segment [a, b]; endpoints must have opposite
// det g signs.  Bisection to width tol::kStepFloor plus one Newton polish.
HypersurfacePoint locate_hypersurface(const MetricSpec& spec, const Vec& a, const Vec& b);

// Kernel direction and transversality indicator at a point of the
// degeneracy hypersurface.
RadicalReport radical_check(const MetricSpec& spec, const Vec& point);

}  // namespace sigloop::geom

#endif
