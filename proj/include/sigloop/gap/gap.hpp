#ifndef SIGLOOP_GAP_GAP_HPP
#define SIGLOOP_GAP_GAP_HPP

#include <optional>
#include <utility>
#include <vector>

#include "sigloop/curves/curve.hpp"
#include "sigloop/curves/transport.hpp"
#include "sigloop/tolerances.hpp"

namespace sigloop::gap {

struct GapSample {
    double u = 0.0;
    double mu = 0.0;
    double w = 0.0;  // dmu/du = Euclidean norm of the frame components
    geom::Vec V;     // tangent components in the parallel frame
    double q = 0.0;  // g(tangent, tangent) / w^2; NaN off the Lorentzian sector
    double det_g = 0.0;
    curves::SampleTag tag = curves::SampleTag::on_h;
    geom::Mat frame;
};

struct GapParametrization {
    double u0 = 0.0;  // mu(u0) = 0
    std::vector<GapSample> samples;
    // max over shared samples of |mu - mu_on_half_grid| / 15
    double richardson_error = 0.0;
};

GapParametrization compute_gap(const geom::MetricSpec& spec, const curves::CurvePath& curve,
                               const curves::ParallelFrame& frame);

enum class Verdict {
    pseudo_timelike,
    pseudo_spacelike,
    pseudo_lightlike,
    asymptotically_lightlike,
    mixed_unclassified,
    pseudo_timelike_vacuous,  // no Lorentzian samples at all
};

const char* verdict_name(Verdict v);

struct SegmentDiagnostic {
    curves::SampleTag tag = curves::SampleTag::on_h;
    int count = 0;
    double u_begin = 0.0;
    double u_end = 0.0;
    double q_min = 0.0;
    double q_max = 0.0;
};

struct ClassificationReport {
    Verdict verdict = Verdict::mixed_unclassified;
    double margin = 0.0;
    double threshold = tol::kClassifyThreshold;
    double sup_q = 0.0;
    double inf_q = 0.0;
    bool approaches_left = false;
    bool approaches_right = false;
    std::optional<double> limit_left;   // extrapolated q at the left approach
    std::optional<double> limit_right;  // ... right approach
    std::vector<SegmentDiagnostic> segments;
    std::vector<std::pair<double, double>> q_mu;  // Lorentzian (mu, q) pairs
};

ClassificationReport classify(const geom::MetricSpec& spec, const curves::CurvePath& curve,
                              const curves::ParallelFrame& frame,
                              double threshold = tol::kClassifyThreshold);

struct InvarianceReport {
    double c1 = 0.0;
    double c2 = 0.0;
    double max_frame_residual = 0.0;  // relative reconstruction residual
    double worst_lower_slack = 0.0;   // min over samples of mu - c1*mu_tilde
    double worst_upper_slack = 0.0;   // min over samples of c2*mu_tilde - mu
    int compared_samples = 0;
    bool ok = false;
};

// gapB must come from the frame E*B (columns transform by the constant basis
// matrix B).  Components then transform by B^{-1}, giving
// c1 = 1/(n*max|B^{-1}|) and c2 = n*max|B| with c1*mu_tilde <= mu <= c2*mu_tilde.
InvarianceReport check_basis_invariance(const GapParametrization& gapA,
                                        const GapParametrization& gapB,
                                        const geom::Mat& frame_change);

// Coordinate basis pseudo-orthonormalized by Gram-Schmidt in g at the point.
geom::Mat default_frame(const geom::MetricSpec& spec, const geom::Vec& point);

struct ClassifyOptions {
    int sample_count = 401;  // uniform grid size for symbolic curves
    double threshold = tol::kClassifyThreshold;
    std::vector<double> extra_params;          // forced parameter values
    std::optional<geom::Mat> initial_frame;    // default: default_frame at u0
};

struct ClassificationOutcome {
    std::vector<double> grid;
    double u0 = 0.0;
    curves::ParallelFrame frame;
    GapParametrization gap;
    ClassificationReport report;
};

// Grid construction (uniform + geometric tails toward both ends for symbolic
// curves; the curve's own samples otherwise), frame seeding, transport, GAP,
// and classification in one call.
ClassificationOutcome run_classification(const geom::MetricSpec& spec,
                                         const curves::CurvePath& curve,
                                         const ClassifyOptions& options = {});

}  // namespace sigloop::gap

#endif
