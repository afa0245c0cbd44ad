#ifndef SIGLOOP_CURVES_TRANSPORT_HPP
#define SIGLOOP_CURVES_TRANSPORT_HPP

#include <vector>

#include "sigloop/curves/curve.hpp"
#include "sigloop/tolerances.hpp"

namespace sigloop::curves {

enum class TransportStatus { completed, hit_hypersurface };

struct FrameSample {
    double u = 0.0;
    geom::Vec point;
    geom::Mat frame;  // columns are the transported basis vectors
    double frame_det = 0.0;
    double det_g = 0.0;
};

struct ParallelFrame {
    TransportStatus status = TransportStatus::completed;
    double u0 = 0.0;
    std::vector<FrameSample> samples;  // ascending in u, exactly at grid points reached
};

struct TransportOptions {
    double rel_tol = tol::kOdeRel;
    double abs_tol = tol::kOdeAbs;
    double det_floor = tol::kDetFloor;
};

// Parallel-transports the basis along the curve from u0 across every grid
// point, recording the frame at each grid value reached.  Transport halts
// with a partial result once |det g| drops below options.det_floor.
ParallelFrame integrate_transport(const geom::MetricSpec& spec, const CurvePath& curve,
                                  const geom::Mat& initial_basis, double u0,
                                  const std::vector<double>& grid,
                                  const TransportOptions& options = {});

}  // namespace sigloop::curves

#endif
