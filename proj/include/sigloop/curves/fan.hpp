#ifndef SIGLOOP_CURVES_FAN_HPP
#define SIGLOOP_CURVES_FAN_HPP

#include <optional>
#include <vector>

#include "sigloop/curves/curve.hpp"
#include "sigloop/tolerances.hpp"

namespace sigloop::curves {

enum class Orientation { past, future };

const char* orientation_name(Orientation o);

// Escape bounds for fan curves: coordinate-time window plus a Euclidean
// radius around the seed's spatial coordinates.
struct FanBox {
    double t_min = 0.0;
    double t_max = 0.0;
    double radius = 0.0;
};

struct FanOptions {
    Orientation orientation = Orientation::past;
    // Euclidean spatial speed as a fraction of the null value: 1 gives
    // lightlike rays, anything below 1 gives timelike interior curves.
    double speed_fraction = 1.0;
    std::optional<FanBox> box;
    // Fraction of the seed's |t| below which integration switches from the
    // arc-length phase to the t-phase (where d/dt stays regular at t = 0).
    double switch_fraction = tol::kFanSwitchFraction;
    // The forced geometric sample grid of the t-phase stops at
    // tail_floor * |t_seed| before the final t = 0 sample.
    double tail_floor = 1e-6;
    double rel_tol = tol::kOdeRel;
    double abs_tol = tol::kOdeAbs;
    bool throw_if_all_escape = true;
};

struct FanArcPoint {
    double t = 0.0;
    double sigma = 0.0;
};

struct FanDirection {
    geom::Vec v;  // unit spatial direction, n-1 entries
    bool escaped = false;
    geom::Vec crossing;  // full coordinates; valid when !escaped
    CurvePath curve;     // sampled; parameter is |t - t_seed| so tangents stay finite
    std::vector<FanArcPoint> arc;  // t vs. Euclidean spatial arc length sigma
};

struct FanResult {
    geom::Vec seed;
    Orientation orientation = Orientation::past;
    double speed_fraction = 1.0;
    std::vector<FanDirection> directions;
};

// Deterministic unit directions: +/-1 alternating (1 spatial dim), the
// uniform circle (2), or a Fibonacci sphere (3).
std::vector<geom::Vec> fan_directions(int spatial_dim, int count);

FanResult integrate_fan(const geom::MetricSpec& spec, const geom::Vec& seed,
                        const std::vector<geom::Vec>& directions, const FanOptions& options);

FanResult integrate_null_fan(const geom::MetricSpec& spec, const geom::Vec& seed,
                             int direction_count, Orientation orientation);

}  // namespace sigloop::curves

#endif
