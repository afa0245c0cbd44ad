#ifndef SIGLOOP_LOOPS_LOOPS_HPP
#define SIGLOOP_LOOPS_LOOPS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigloop/curves/curve.hpp"
#include "sigloop/gap/gap.hpp"
#include "sigloop/geometry/metric.hpp"
#include "sigloop/tolerances.hpp"

namespace sigloop::loops {

// Closed coordinate box {0 <= t <= t0} x {|x - center| <= xi0} in a
// normal-form chart.  The degenerate face t = 0 is included.
struct CompactBox {
    double t0 = 1.0;
    geom::Vec center;  // spatial coordinates, dimension n-1
    double xi0 = 1.0;
};

// Constant-coefficient lower bound -t dt^2 + G0 * delta_ij for the metric on
// a compact box.  Null cones of the bound contain the true null cones.
struct ComparisonMetric {
    double G0 = 0.0;
    geom::Vec minimizer_point;      // full coordinates of the argmin
    geom::Vec minimizer_direction;  // unit spatial direction achieving G0
    geom::MetricSpec bound;         // -t dt^2 + G0 delta as a MetricSpec
};

ComparisonMetric minimize_spatial_form(const geom::MetricSpec& spec, const CompactBox& box,
                                       int grid_resolution = 32);

struct ContainmentReport {
    int samples = 0;
    double min_value = 0.0;  // smallest g(X,X) seen over bound-null vectors X
};

// Samples bound-null vectors X at random interior points and verifies
// g(X,X) >= -tol::kConeContain.  Throws ContainmentViolated otherwise.
ContainmentReport cone_containment_check(const geom::MetricSpec& spec,
                                         const ComparisonMetric& comparison,
                                         const CompactBox& box, int sample_count,
                                         std::uint64_t seed = 1);

// Highest fan seed (t1, center) whose bound-metric null fan stays inside the
// box: t1 = min(((9/4) xi0^2 G0)^(1/3), 0.99 t0) when the full-height fan
// would be too wide, else t0.
geom::Vec choose_apex(const ComparisonMetric& comparison, const CompactBox& box);

enum class SegmentRole { lorentzian_past, lorentzian_future, riemannian_connector };
const char* segment_role_name(SegmentRole role);

struct LoopSegment {
    SegmentRole role = SegmentRole::lorentzian_past;
    curves::CurvePath path;
    // Present for Lorentzian-side segments: causal character re-derived from
    // the samples alone.
    std::optional<gap::ClassificationReport> classification;
};

struct CrossingRecord {
    geom::Vec point;
    double det_g = 0.0;
    geom::RadicalVerdict radical = geom::RadicalVerdict::transverse;
};

// A witnessed coincidence gamma(s1) = gamma(s2) together with the two
// velocity vectors there.
struct IntersectionRecord {
    geom::Vec point_first;
    geom::Vec point_second;
    geom::Vec tangent_first;
    geom::Vec tangent_second;
    double g_first = 0.0;   // g(X,X) for tangent_first at point_first
    double g_second = 0.0;  // g(X,X) for tangent_second at point_second
    bool positively_proportional = false;
    std::string sector;  // "lorentzian" | "hypersurface" | "riemannian"
};

struct LoopCertificate {
    std::string kind;  // "local" | "global-lorentzian" | "global-hypersurface" | "global-riemannian"
    geom::Vec base_point;  // the point the loop was requested through
    geom::Vec apex;
    CompactBox box;
    double cone_fraction = tol::kConeFraction;
    double G0 = 0.0;
    std::vector<LoopSegment> segments;           // traversal order
    std::vector<CrossingRecord> crossings;       // degenerate-hypersurface crossings
    IntersectionRecord endpoint_intersection;    // loop start vs loop end
    std::optional<IntersectionRecord> base_intersection;  // interior revisit of base_point
    double closure_residual = 0.0;
    std::string loop_class;  // "closed-pseudo-timelike" | "loop"
};

struct LoopOptions {
    double t0 = 1.0;
    double xi0 = 0.0;  // <= 0: choose automatically
    double cone_fraction = tol::kConeFraction;
    int grid_resolution = 32;
};

// Closed curve through a degeneracy point q on the hypersurface: two
// timelike fan legs joined below the hypersurface by a spatial connector.
LoopCertificate build_local_loop(const geom::MetricSpec& spec, const geom::Vec& q,
                                 const LoopOptions& options = {});

// Closed curve through an arbitrary point p; the construction branches on
// the metric signature at p.
LoopCertificate build_global_loop(const geom::MetricSpec& spec, const geom::Vec& p,
                                  const LoopOptions& options = {});

struct ValidationItem {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationItem> items;
    bool all_pass = false;
};

// Re-derives every certificate claim from the stored samples and the metric.
// Never throws on a structurally well-formed certificate: failures are
// reported as items.
ValidationReport validate_certificate(const geom::MetricSpec& spec,
                                      const LoopCertificate& cert);

}  // namespace sigloop::loops

#endif
