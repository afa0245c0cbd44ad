#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "sigloop/curves/curve.hpp"
#include "sigloop/curves/fan.hpp"
#include "sigloop/curves/rk45.hpp"
#include "sigloop/curves/transport.hpp"
#include "sigloop/errors.hpp"
#include "sigloop/io/presets.hpp"
#include "sigloop/rng.hpp"
#include "sigloop/tolerances.hpp"

using namespace sigloop;
using Components = std::map<std::pair<int, int>, std::string>;

namespace {

geom::Vec pt2(double t, double x) {
    geom::Vec p(2);
    p << t, x;
    return p;
}

}  // namespace

TEST_CASE("uniform grids hit both ends") {
    const std::vector<double> g = curves::uniform_grid(-1.0, 1.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == doctest::Approx(-1.0));
    CHECK(g[2] == doctest::Approx(0.0));
    CHECK(g.back() == doctest::Approx(1.0));
}

TEST_CASE("symbolic sampling tags the signature sectors") {
    const geom::MetricSpec spec = io::manifold_preset("toy");
    curves::SymbolicCurve line;
    line.parameter = "u";
    line.a = -0.5;
    line.b = 0.5;
    line.components.push_back(dsl::Expression::parse("u", {"u"}));
    line.components.push_back(dsl::Expression::parse("0", {"u"}));
    const curves::CurvePath path = curves::sample_symbolic_curve(spec, line, 101);
    REQUIRE(path.samples().size() == 101);
    CHECK(path.samples().front().tag == curves::SampleTag::lorentzian);
    CHECK(path.samples().back().tag == curves::SampleTag::riemannian);
    CHECK(path.samples()[50].tag == curves::SampleTag::on_h);
    CHECK(path.samples().front().det_g == doctest::Approx(-0.5));
    CHECK(path.samples().front().tangent(0) == doctest::Approx(1.0));
    CHECK(path.a() == doctest::Approx(-0.5));
    CHECK(path.b() == doctest::Approx(0.5));
}

TEST_CASE("sampled paths interpolate points and tangents") {
    const geom::MetricSpec spec = io::manifold_preset("flat");
    curves::SymbolicCurve arc;
    arc.parameter = "u";
    arc.a = 0.0;
    arc.b = 1.0;
    arc.components.push_back(dsl::Expression::parse("sin(u)", {"u"}));
    arc.components.push_back(dsl::Expression::parse("cos(u)", {"u"}));
    const curves::CurvePath dense = curves::sample_symbolic_curve(spec, arc, 201);

    geom::Vec p, v;
    dense.eval(0.375, &p, &v);
    CHECK(p(0) == doctest::Approx(std::sin(0.375)).epsilon(1e-9));
    CHECK(p(1) == doctest::Approx(std::cos(0.375)).epsilon(1e-9));
    CHECK(v(0) == doctest::Approx(std::cos(0.375)).epsilon(1e-6));
    CHECK(v(1) == doctest::Approx(-std::sin(0.375)).epsilon(1e-6));
}

TEST_CASE("reversal flips tangents and keeps the parameter increasing") {
    const geom::MetricSpec spec = io::manifold_preset("toy");
    const curves::CurvePath path =
        curves::sample_symbolic_curve(spec, io::curve_preset("toy-alpha"), 21);
    const curves::CurvePath rev = path.reversed();
    REQUIRE(rev.samples().size() == path.samples().size());
    CHECK(rev.samples().front().point(0) == doctest::Approx(path.samples().back().point(0)));
    CHECK(rev.samples().back().point(0) == doctest::Approx(path.samples().front().point(0)));
    for (std::size_t i = 1; i < rev.samples().size(); ++i)
        CHECK(rev.samples()[i].u > rev.samples()[i - 1].u);
    CHECK(rev.samples().front().tangent(0) ==
          doctest::Approx(-path.samples().back().tangent(0)));
}

TEST_CASE("embedded Runge-Kutta steps meet tight tolerances") {
    // dy/du = cos(u) integrated across [0, 1].
    curves::State y(1);
    y(0) = 0.0;
    double u = 0.0, h = 0.1;
    curves::StepControl ctl;
    auto rhs = [](double uu, const curves::State& yy, curves::State& dy) {
        dy.resize(yy.size());
        dy(0) = std::cos(uu);
    };
    int guard = 0;
    while (u < 1.0 && ++guard < 10000) {
        double h_try = std::min(h, 1.0 - u);
        curves::rk45_try_step(rhs, u, y, h_try, ctl);
        h = h_try;
    }
    CHECK(y(0) == doctest::Approx(std::sin(1.0)).epsilon(1e-9));

    // Harmonic oscillator keeps its energy over many periods.
    curves::State z(2);
    z << 1.0, 0.0;
    u = 0.0;
    h = 0.05;
    auto osc = [](double, const curves::State& yy, curves::State& dy) {
        dy.resize(yy.size());
        dy(0) = yy(1);
        dy(1) = -yy(0);
    };
    guard = 0;
    const double T = 20.0 * std::acos(-1.0);
    while (u < T && ++guard < 1000000) {
        double h_try = std::min(h, T - u);
        curves::rk45_try_step(osc, u, z, h_try, ctl);
        h = h_try;
    }
    CHECK(z(0) * z(0) + z(1) * z(1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("throwing right-hand sides shrink the step and never advance") {
    curves::State y(1);
    y(0) = 0.0;
    double u = 0.0, h = 0.1;
    curves::StepControl ctl;
    auto bad = [](double, const curves::State&, curves::State&) -> void {
        throw DomainError("always fails");
    };
    for (int i = 0; i < 60; ++i) {
        double h_try = h;
        CHECK_FALSE(curves::rk45_try_step(bad, u, y, h_try, ctl));
        CHECK(h_try < h);
        h = h_try;
    }
    CHECK(u == doctest::Approx(0.0));
    CHECK(y(0) == doctest::Approx(0.0));
    CHECK(h < ctl.step_floor);  // callers detect this and raise the underflow error
}

TEST_CASE("transport is the identity when the connection vanishes") {
    const geom::MetricSpec flat = io::manifold_preset("flat");
    const curves::CurvePath path =
        curves::sample_symbolic_curve(flat, io::curve_preset("flat-line"), 41);
    geom::Mat frame0 = geom::Mat::Identity(2, 2);
    frame0(0, 1) = 0.25;  // arbitrary oblique frame
    const std::vector<double> grid = curves::uniform_grid(0.0, 1.0, 11);
    const curves::ParallelFrame pf =
        curves::integrate_transport(flat, path, frame0, 0.0, grid, {});
    CHECK(pf.status == curves::TransportStatus::completed);
    REQUIRE(pf.samples.size() == 11);
    for (const curves::FrameSample& fs : pf.samples)
        CHECK((fs.frame - frame0).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("transported coordinate vector grows like 1/sqrt(|t|)") {
    // Along x = 0 in g = t dt^2 + dx^2 the vector d_t transported from
    // t = -1 has components (sqrt(1/|t|), 0); at t = -1/4 that is (2, 0).
    const geom::MetricSpec toy = io::manifold_preset("toy");
    curves::SymbolicCurve drop;
    drop.parameter = "u";
    drop.a = -1.0;
    drop.b = -0.25;
    drop.components.push_back(dsl::Expression::parse("u", {"u"}));
    drop.components.push_back(dsl::Expression::parse("0", {"u"}));
    const curves::CurvePath path = curves::sample_symbolic_curve(toy, drop, 41);
    const std::vector<double> grid = curves::uniform_grid(-1.0, -0.25, 7);
    const curves::ParallelFrame pf =
        curves::integrate_transport(toy, path, geom::Mat::Identity(2, 2), -1.0, grid, {});
    CHECK(pf.status == curves::TransportStatus::completed);
    const curves::FrameSample& last = pf.samples.back();
    CHECK(last.u == doctest::Approx(-0.25));
    CHECK(last.frame(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(last.frame(1, 0) == doctest::Approx(0.0));
    CHECK(last.frame(0, 1) == doctest::Approx(0.0));
    CHECK(last.frame(1, 1) == doctest::Approx(1.0));
    // Inner products are preserved even though components blow up.
    const geom::Mat g_end = geom::metric_at(toy, last.point).g;
    const geom::Mat products = last.frame.transpose() * g_end * last.frame;
    CHECK(products(0, 0) == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(products(0, 1) == doctest::Approx(0.0));
    CHECK(products(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("transport stops cleanly at the degeneracy") {
    const geom::MetricSpec toy = io::manifold_preset("toy");
    const curves::CurvePath path =
        curves::sample_symbolic_curve(toy, io::curve_preset("toy-alpha"), 101);
    std::vector<double> grid;
    for (const curves::CurveSample& s : path.samples()) grid.push_back(s.u);
    const curves::ParallelFrame pf =
        curves::integrate_transport(toy, path, geom::Mat::Identity(2, 2), -1.0, grid, {});
    CHECK(pf.status == curves::TransportStatus::hit_hypersurface);
    CHECK(pf.samples.size() < grid.size());
    CHECK(std::fabs(pf.samples.back().det_g) >= tol::kDetFloor);
    // Pairings stay intact all the way down.
    for (const curves::FrameSample& fs : pf.samples) {
        const geom::Mat g = geom::metric_at(toy, fs.point).g;
        const geom::Mat products = fs.frame.transpose() * g * fs.frame;
        CHECK(products(0, 0) == doctest::Approx(-1.0).epsilon(1e-7));
        CHECK(products(1, 1) == doctest::Approx(1.0).epsilon(1e-7));
    }
}

TEST_CASE("transport is linear in the seed frame") {
    const geom::MetricSpec spec = io::manifold_preset("desitter2d");
    curves::SymbolicCurve seg;
    seg.parameter = "u";
    seg.a = 0.2;
    seg.b = 1.0;
    seg.components.push_back(dsl::Expression::parse("u", {"u"}));
    seg.components.push_back(dsl::Expression::parse("u / 3", {"u"}));
    const curves::CurvePath path = curves::sample_symbolic_curve(spec, seg, 41);
    const std::vector<double> grid = curves::uniform_grid(0.2, 1.0, 9);
    geom::Mat B(2, 2);
    B << 2.0, 1.0, -1.0, 0.5;
    const curves::ParallelFrame base =
        curves::integrate_transport(spec, path, geom::Mat::Identity(2, 2), 0.2, grid, {});
    const curves::ParallelFrame moved = curves::integrate_transport(spec, path, B, 0.2, grid, {});
    REQUIRE(base.samples.size() == moved.samples.size());
    for (std::size_t i = 0; i < base.samples.size(); ++i) {
        const geom::Mat predicted = base.samples[i].frame * B;
        CHECK((predicted - moved.samples[i].frame).cwiseAbs().maxCoeff() ==
              doctest::Approx(0.0).epsilon(1e-8));
    }
}

TEST_CASE("null fans cross at the closed-form spatial distance") {
    const geom::MetricSpec spec = io::manifold_preset("toy-normal");
    for (double t0 : {0.25, 1.0, 1.69}) {
        const curves::FanResult fan =
            curves::integrate_null_fan(spec, pt2(t0, 0.4), 2, curves::Orientation::past);
        REQUIRE(fan.directions.size() == 2);
        const double expected = (2.0 / 3.0) * std::sqrt(t0 * t0 * t0);
        for (const curves::FanDirection& dir : fan.directions) {
            REQUIRE_FALSE(dir.escaped);
            CHECK(dir.crossing(0) == doctest::Approx(0.0).epsilon(1e-10));
            CHECK(std::fabs(dir.crossing(1) - 0.4) == doctest::Approx(expected).epsilon(1e-8));
        }
        // The two directions leave on opposite sides.
        CHECK((fan.directions[0].crossing(1) - 0.4) *
                  (fan.directions[1].crossing(1) - 0.4) < 0.0);
    }
}

TEST_CASE("fan curves are null along their whole length") {
    for (const char* name : {"toy-normal", "desitter2d"}) {
        const geom::MetricSpec spec = io::manifold_preset(name);
        const curves::FanResult fan =
            curves::integrate_null_fan(spec, pt2(0.9, -0.2), 2, curves::Orientation::past);
        for (const curves::FanDirection& dir : fan.directions) {
            REQUIRE(dir.curve.samples().size() > 10);
            for (const curves::CurveSample& s : dir.curve.samples()) {
                const geom::Mat g = geom::metric_at(spec, s.point).g;
                CHECK(std::fabs(s.tangent.dot(g * s.tangent)) < tol::kNullResidual);
            }
            // Runs from the seed down to the crossing.
            CHECK(dir.curve.samples().front().point(0) == doctest::Approx(0.9));
            CHECK(dir.curve.samples().back().point(0) == doctest::Approx(0.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("slower-than-light fans scale the crossing distance") {
    const geom::MetricSpec spec = io::manifold_preset("toy-normal");
    curves::FanOptions options;
    options.orientation = curves::Orientation::past;
    options.speed_fraction = 0.9;
    const curves::FanResult fan =
        curves::integrate_fan(spec, pt2(1.0, 0.0), curves::fan_directions(1, 2), options);
    const double expected = 0.9 * (2.0 / 3.0);
    for (const curves::FanDirection& dir : fan.directions) {
        REQUIRE_FALSE(dir.escaped);
        CHECK(std::fabs(dir.crossing(1)) == doctest::Approx(expected).epsilon(1e-8));
        // Uniformly timelike on the way down (t > 0 side of the normal form).
        for (const curves::CurveSample& s : dir.curve.samples())
            if (s.point(0) > 1e-6) {
                const geom::Mat g = geom::metric_at(spec, s.point).g;
                CHECK(s.tangent.dot(g * s.tangent) < 0.0);
            }
    }
}

TEST_CASE("fans without a degeneracy to hit escape the box") {
    const geom::MetricSpec flat = io::manifold_preset("flat");
    CHECK_THROWS_AS(
        curves::integrate_null_fan(flat, pt2(1.0, 0.0), 2, curves::Orientation::past),
        EscapedBox);

    // A box too narrow for the cone reports per-direction escapes when asked
    // not to throw.
    const geom::MetricSpec spec = io::manifold_preset("toy-normal");
    curves::FanOptions options;
    options.orientation = curves::Orientation::past;
    options.box = curves::FanBox{-0.1, 1.1, 0.05};
    options.throw_if_all_escape = false;
    const curves::FanResult fan =
        curves::integrate_fan(spec, pt2(1.0, 0.0), curves::fan_directions(1, 2), options);
    for (const curves::FanDirection& dir : fan.directions) CHECK(dir.escaped);
}

TEST_CASE("fan seeds on the wrong side are rejected") {
    const geom::MetricSpec spec = io::manifold_preset("toy-normal");
    CHECK_THROWS_AS(
        curves::integrate_null_fan(spec, pt2(0.0, 0.0), 2, curves::Orientation::past),
        DegenerateStart);
}
