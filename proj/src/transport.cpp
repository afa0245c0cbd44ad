#include "sigloop/curves/transport.hpp"

#include <algorithm>
#include <cmath>

#include "sigloop/curves/rk45.hpp"
#include "sigloop/errors.hpp"

namespace sigloop::curves {

namespace {

// State layout: n*n frame entries, column-major (column j = basis vector j).
State pack(const geom::Mat& frame) {
    const int n = static_cast<int>(frame.rows());
    State y(n * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) y(j * n + i) = frame(i, j);
    return y;
}

geom::Mat unpack(const State& y, int n) {
    geom::Mat frame(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) frame(i, j) = y(j * n + i);
    return frame;
}

}  // namespace

ParallelFrame integrate_transport(const geom::MetricSpec& spec, const CurvePath& curve,
                                  const geom::Mat& initial_basis, double u0,
                                  const std::vector<double>& grid,
                                  const TransportOptions& options) {
    const int n = spec.dimension();
    if (initial_basis.rows() != n || initial_basis.cols() != n)
        throw InvalidArgument("initial basis must be square of the manifold dimension");
    if (curve.dimension() != n)
        throw InvalidArgument("curve dimension does not match the metric");
    if (grid.size() < 2) throw InvalidArgument("transport grid needs at least two points");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k - 1] < grid[k]))
            throw InvalidArgument("transport grid must be strictly increasing");
    if (u0 < grid.front() - 1e-12 || u0 > grid.back() + 1e-12)
        throw InvalidArgument("transport start lies outside the grid");

    {
        geom::Vec p0;
        curve.eval(u0, &p0, nullptr);
        const geom::MetricValue mv0 = geom::metric_at(spec, p0);
        if (std::abs(mv0.det) < options.det_floor)
            throw DegenerateStart("transport starts where the metric is degenerate");
    }

    // dE^l/du = -Gamma^l_{mn} gamma'^m E^n, one copy per basis column.
    auto rhs = [&](double u, const State& y, State& dy) {
        geom::Vec point, tangent;
        curve.eval(u, &point, &tangent);
        const geom::ChristoffelValue ch = geom::christoffel_at(spec, point);
        dy.resize(n * n);
        for (int col = 0; col < n; ++col) {
            for (int l = 0; l < n; ++l) {
                double acc = 0.0;
                for (int m = 0; m < n; ++m)
                    for (int kk = 0; kk < n; ++kk)
                        acc += ch.gamma[static_cast<std::size_t>(l)](m, kk) * tangent(m) *
                               y(col * n + kk);
                dy(col * n + l) = -acc;
            }
        }
    };

    auto record = [&](ParallelFrame& result, double u, const State& y) {
        FrameSample s;
        s.u = u;
        curve.eval(u, &s.point, nullptr);
        s.frame = unpack(y, n);
        s.frame_det = s.frame.determinant();
        s.det_g = geom::det_g(spec, s.point);
        if (std::abs(s.frame_det) <= tol::kFrameDet)
            throw FrameDegenerated("transported frame became singular");
        result.samples.push_back(std::move(s));
    };

    // March in both directions from u0, sweeping the grid points on each side.
    ParallelFrame result;
    result.u0 = u0;

    StepControl ctl;
    ctl.rel_tol = options.rel_tol;
    ctl.abs_tol = options.abs_tol;

    auto sweep = [&](double direction, std::vector<FrameSample>& out) {
        std::vector<double> targets;
        for (double g : grid) {
            if (direction > 0 ? g > u0 + 1e-15 : g < u0 - 1e-15) targets.push_back(g);
        }
        if (direction < 0) std::reverse(targets.begin(), targets.end());
        if (targets.empty()) return TransportStatus::completed;

        double u = u0;
        State y = pack(initial_basis);
        double h = direction * std::min(1e-3, std::abs(targets.back() - u0));
        State k1(n * n), kend(n * n);
        for (double target : targets) {
            while (direction * (target - u) > 1e-14) {
                if (std::abs(h) > std::abs(target - u)) h = target - u;
                if (std::abs(h) < tol::kStepFloor) {
                    geom::Vec p;
                    curve.eval(u, &p, nullptr);
                    if (std::abs(geom::det_g(spec, p)) < 10 * options.det_floor)
                        return TransportStatus::hit_hypersurface;
                    throw StepSizeUnderflow("transport step size underflow");
                }
                const double u_prev = u;
                const State y_prev = y;
                if (rk45_try_step(rhs, u, y, h, ctl, &k1, &kend)) {
                    geom::Vec p;
                    curve.eval(u, &p, nullptr);
                    if (std::abs(geom::det_g(spec, p)) < options.det_floor) {
                        // Stop just before the degenerate locus; keep what we have.
                        u = u_prev;
                        y = y_prev;
                        return TransportStatus::hit_hypersurface;
                    }
                }
            }
            u = target;
            ParallelFrame tmp;
            record(tmp, u, y);
            out.push_back(std::move(tmp.samples.front()));
        }
        return TransportStatus::completed;
    };

    std::vector<FrameSample> backward, forward;
    const TransportStatus sb = sweep(-1.0, backward);
    const TransportStatus sf = sweep(+1.0, forward);
    result.status = (sb == TransportStatus::hit_hypersurface ||
                     sf == TransportStatus::hit_hypersurface)
                        ? TransportStatus::hit_hypersurface
                        : TransportStatus::completed;

    std::reverse(backward.begin(), backward.end());
    result.samples = std::move(backward);
    const bool u0_on_grid = std::any_of(grid.begin(), grid.end(),
                                        [&](double g) { return std::abs(g - u0) <= 1e-15; });
    if (u0_on_grid) {
        ParallelFrame tmp;
        record(tmp, u0, pack(initial_basis));
        result.samples.push_back(std::move(tmp.samples.front()));
    }
    result.samples.insert(result.samples.end(), forward.begin(), forward.end());
    return result;
}

}  // namespace sigloop::curves
