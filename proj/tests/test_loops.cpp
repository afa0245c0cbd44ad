#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "sigloop/errors.hpp"
#include "sigloop/io/presets.hpp"
#include "sigloop/loops/loops.hpp"
#include "sigloop/loops/nelder_mead.hpp"

using namespace sigloop;
using Components = std::map<std::pair<int, int>, std::string>;

namespace {

geom::Vec pt2(double t, double x) {
    geom::Vec p(2);
    p << t, x;
    return p;
}

loops::CompactBox box2(double t0, double center, double xi0) {
    loops::CompactBox b;
    b.t0 = t0;
    b.center = geom::Vec::Constant(1, center);
    b.xi0 = xi0;
    return b;
}

const loops::ValidationItem& item(const loops::ValidationReport& rep, const std::string& name) {
    for (const loops::ValidationItem& it : rep.items)
        if (it.name == name) return it;
    REQUIRE(false);
    return rep.items.front();
}

}  // namespace

TEST_CASE("simplex descent finds a quadratic minimum") {
    const auto f = [](const std::vector<double>& x) {
        const double a = x[0] - 1.5, b = x[1] + 0.25;
        return 3.0 * a * a + b * b + 7.0;
    };
    const loops::NelderMeadResult res = loops::nelder_mead(f, {0.0, 0.0}, 0.5, 1e-14, 500);
    CHECK(res.x[0] == doctest::Approx(1.5).epsilon(1e-5));
    CHECK(res.x[1] == doctest::Approx(-0.25).epsilon(1e-4));
    CHECK(res.value == doctest::Approx(7.0));
    CHECK(res.iterations > 0);
}

TEST_CASE("spatial form minimization on the presets") {
    SUBCASE("constant spatial part") {
        const geom::MetricSpec spec = io::manifold_preset("toy-normal");
        const loops::ComparisonMetric cm =
            loops::minimize_spatial_form(spec, box2(1.0, 0.0, 1.0), 16);
        CHECK(cm.G0 == doctest::Approx(1.0));
        CHECK(std::fabs(cm.minimizer_direction(0)) == doctest::Approx(1.0));
        CHECK(cm.bound.normal_form());
        CHECK(cm.bound.component_source(0, 0) == "-t");
    }

    SUBCASE("t-dependent spatial part attains its minimum on the degenerate face") {
        const geom::MetricSpec spec = io::manifold_preset("desitter2d");
        const loops::ComparisonMetric cm =
            loops::minimize_spatial_form(spec, box2(1.0, 0.0, 1.0), 16);
        CHECK(cm.G0 == doctest::Approx(1.0).epsilon(1e-9));  // (1 + t^2/4)^2 at t = 0
        CHECK(cm.minimizer_point(0) == doctest::Approx(0.0));
    }

    SUBCASE("anisotropic three-dimensional block picks the soft axis") {
        const geom::MetricSpec spec = io::manifold_preset("aniso3d");
        loops::CompactBox box;
        box.t0 = 1.0;
        box.center = geom::Vec::Zero(2);
        box.xi0 = 0.8;
        const loops::ComparisonMetric cm = loops::minimize_spatial_form(spec, box, 12);
        // diag(2, 1 + x^2) has least eigenvalue 1 at x = 0, along y.
        CHECK(cm.G0 == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(cm.minimizer_point(1) == doctest::Approx(0.0).epsilon(1e-6));
        CHECK(std::fabs(cm.minimizer_direction(1)) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::fabs(cm.minimizer_direction(0)) == doctest::Approx(0.0).epsilon(1e-7));
    }

    SUBCASE("requires the normal form") {
        CHECK_THROWS_AS(
            loops::minimize_spatial_form(io::manifold_preset("toy"), box2(1.0, 0.0, 1.0), 8),
            InvalidArgument);
    }

    SUBCASE("rejects a sign-indefinite spatial block") {
        const geom::MetricSpec bad = geom::MetricSpec::create(
            {"t", "x"}, Components{{{0, 0}, "-t"}, {{1, 1}, "x"}}, true);
        CHECK_THROWS_AS(loops::minimize_spatial_form(bad, box2(1.0, 0.0, 1.0), 8),
                        NotPositiveDefinite);
    }

    SUBCASE("reports a box leaving the chart") {
        const geom::MetricSpec cut = geom::MetricSpec::create(
            {"t", "x"}, Components{{{0, 0}, "-t"}, {{1, 1}, "sqrt(1 - (2 * t))"}}, true);
        CHECK_THROWS_AS(loops::minimize_spatial_form(cut, box2(1.0, 0.0, 1.0), 8),
                        BoxOutsideChart);
    }
}

TEST_CASE("containment of the comparison cones") {
    const geom::MetricSpec spec = io::manifold_preset("toy-normal");
    const loops::CompactBox box = box2(1.0, 0.0, 0.8);
    const loops::ComparisonMetric cm = loops::minimize_spatial_form(spec, box, 16);

    const loops::ContainmentReport rep = loops::cone_containment_check(spec, cm, box, 500, 7);
    CHECK(rep.samples == 500);
    CHECK(rep.min_value >= -tol::kConeContain);

    // Same seed, same samples: the check is deterministic.
    const loops::ContainmentReport again = loops::cone_containment_check(spec, cm, box, 500, 7);
    CHECK(again.min_value == rep.min_value);

    loops::ComparisonMetric bad = cm;
    bad.G0 = 2.0;  // any slower-than-bound cone now sticks out
    CHECK_THROWS_AS(loops::cone_containment_check(spec, bad, box, 500, 7),
                    ContainmentViolated);
}

TEST_CASE("apex selection against the closed form") {
    const geom::MetricSpec spec = io::manifold_preset("toy-normal");
    loops::ComparisonMetric cm = loops::minimize_spatial_form(spec, box2(1.0, 0.0, 1.0), 8);

    SUBCASE("narrow boxes lower the apex to ((9/4) xi0^2 G0)^(1/3)") {
        geom::Vec apex = loops::choose_apex(cm, box2(1.0, 0.2, 0.5));
        CHECK(apex(0) == doctest::Approx(std::cbrt(2.25 * 0.25)).epsilon(1e-12));  // 0.82548
        CHECK(apex(1) == doctest::Approx(0.2));

        loops::ComparisonMetric stiff = cm;
        stiff.G0 = 4.0;
        apex = loops::choose_apex(stiff, box2(1.0, 0.0, 0.1));
        CHECK(apex(0) == doctest::Approx(std::cbrt(2.25 * 0.01 * 4.0)).epsilon(1e-12));  // 0.44814
    }

    SUBCASE("wide boxes keep the full height") {
        const geom::Vec apex = loops::choose_apex(cm, box2(1.0, -0.1, 2.0));
        CHECK(apex(0) == doctest::Approx(1.0));
        CHECK(apex(1) == doctest::Approx(-0.1));
    }
}

TEST_CASE("local loops close, cross twice, and validate") {
    const geom::MetricSpec spec = io::manifold_preset("toy-normal");
    loops::LoopOptions options;
    options.t0 = 1.0;
    options.xi0 = 1.0;

    const loops::LoopCertificate cert = loops::build_local_loop(spec, pt2(0.0, 0.3), options);
    CHECK(cert.kind == "local");
    CHECK(cert.loop_class == "loop");
    REQUIRE(cert.segments.size() == 3);
    CHECK(cert.segments[0].role == loops::SegmentRole::lorentzian_past);
    CHECK(cert.segments[1].role == loops::SegmentRole::riemannian_connector);
    CHECK(cert.segments[2].role == loops::SegmentRole::lorentzian_future);
    REQUIRE(cert.crossings.size() == 2);
    // Crossings sit where the 0.9-cone of -t dt^2 + dx^2 meets t = 0.
    const double spread = 0.9 * (2.0 / 3.0);
    CHECK(std::fabs(cert.crossings[0].point(1) - 0.3) == doctest::Approx(spread).epsilon(1e-8));
    CHECK(std::fabs(cert.crossings[1].point(1) - 0.3) == doctest::Approx(spread).epsilon(1e-8));
    CHECK(cert.closure_residual <= tol::kClosure);
    CHECK(cert.apex(0) == doctest::Approx(1.0));  // wide box: full height kept
    CHECK_FALSE(cert.base_intersection.has_value());
    CHECK_FALSE(cert.endpoint_intersection.positively_proportional);

    const loops::ValidationReport rep = loops::validate_certificate(spec, cert);
    CHECK(rep.all_pass);
    for (const loops::ValidationItem& it : rep.items) CHECK(it.pass);

    // Both timelike legs were classified on the spot.
    REQUIRE(cert.segments[0].classification.has_value());
    CHECK(cert.segments[0].classification->verdict == gap::Verdict::pseudo_timelike);
    CHECK_FALSE(cert.segments[1].classification.has_value());
}

TEST_CASE("local loops demand a transverse degeneracy point in a normal form chart") {
    loops::LoopOptions options;
    options.t0 = 0.5;
    CHECK_THROWS_AS(
        loops::build_local_loop(io::manifold_preset("flat"), pt2(0.0, 0.0), options),
        InvalidArgument);
    CHECK_THROWS_AS(
        loops::build_local_loop(io::manifold_preset("toy-normal"), pt2(0.4, 0.0), options),
        NotOnHypersurface);
}

TEST_CASE("automatic box sizing still yields a valid loop") {
    const geom::MetricSpec spec = io::manifold_preset("desitter2d");
    loops::LoopOptions options;
    options.t0 = 0.6;  // xi0 left at 0: fitted from the fan width
    const loops::LoopCertificate cert = loops::build_local_loop(spec, pt2(0.0, -0.4), options);
    CHECK(cert.box.xi0 > 0.0);
    CHECK(loops::validate_certificate(spec, cert).all_pass);
}

TEST_CASE("three-dimensional local loop") {
    const geom::MetricSpec spec = io::manifold_preset("aniso3d");
    geom::Vec q(3);
    q << 0.0, 0.2, -0.3;
    loops::LoopOptions options;
    options.t0 = 0.8;
    options.xi0 = 0.7;
    const loops::LoopCertificate cert = loops::build_local_loop(spec, q, options);
    CHECK(cert.segments.size() == 3);
    CHECK(loops::validate_certificate(spec, cert).all_pass);
    // Legs leave along the first fan direction (the x axis, where g_xx = 2),
    // so the crossings sit at the closed-form spread for that stiffness.
    const double spread = 0.9 * (2.0 / 3.0) * std::sqrt(0.8 * 0.8 * 0.8 / 2.0);
    CHECK(std::fabs(cert.crossings[0].point(1) - 0.2) == doctest::Approx(spread).epsilon(1e-7));
    CHECK(cert.crossings[0].point(2) == doctest::Approx(-0.3));
    CHECK(cert.crossings[1].point(2) == doctest::Approx(-0.3));
}

TEST_CASE("global loops in each sector meet the base point") {
    const geom::MetricSpec spec = io::manifold_preset("toy-normal");
    loops::LoopOptions options;
    options.t0 = 1.0;
    options.xi0 = 1.0;

    SUBCASE("through a Lorentzian point") {
        const geom::Vec p = pt2(0.5, 0.0);
        const loops::LoopCertificate cert = loops::build_global_loop(spec, p, options);
        CHECK(cert.kind == "global-lorentzian");
        CHECK((cert.apex - p).norm() == doctest::Approx(0.0));  // loop pivots at p itself
        REQUIRE(cert.base_intersection.has_value());
        CHECK(cert.base_intersection->sector == "lorentzian");
        CHECK(cert.base_intersection->g_first < 0.0);
        CHECK(cert.base_intersection->g_second < 0.0);
        CHECK((cert.base_intersection->point_first - p).norm() < tol::kClosure);
        CHECK(loops::validate_certificate(spec, cert).all_pass);
    }

    SUBCASE("through a degeneracy point") {
        const geom::Vec p = pt2(0.0, 0.0);
        const loops::LoopCertificate cert = loops::build_global_loop(spec, p, options);
        CHECK(cert.kind == "global-hypersurface");
        REQUIRE(cert.base_intersection.has_value());
        CHECK(cert.base_intersection->sector == "hypersurface");
        CHECK((cert.base_intersection->point_first - p).norm() < tol::kClosure);
        CHECK((cert.base_intersection->point_second - p).norm() < tol::kClosure);
        // Both visits run lightlike along the degenerate directions.
        CHECK(std::fabs(cert.base_intersection->g_first) <= tol::kNullResidual);
        CHECK(std::fabs(cert.base_intersection->g_second) <= tol::kNullResidual);
        CHECK(loops::validate_certificate(spec, cert).all_pass);
    }

    SUBCASE("through a Riemannian point") {
        const geom::Vec p = pt2(-0.5, 0.0);
        const loops::LoopCertificate cert = loops::build_global_loop(spec, p, options);
        CHECK(cert.kind == "global-riemannian");
        REQUIRE(cert.base_intersection.has_value());
        CHECK(cert.base_intersection->sector == "riemannian");
        CHECK(cert.base_intersection->g_first > 0.0);
        CHECK(cert.base_intersection->g_second > 0.0);
        CHECK(cert.base_intersection->positively_proportional);
        CHECK((cert.base_intersection->point_first - p).norm() < tol::kClosure);
        CHECK(loops::validate_certificate(spec, cert).all_pass);
    }
}

TEST_CASE("global loop on the curved preset") {
    const geom::MetricSpec spec = io::manifold_preset("desitter2d");
    loops::LoopOptions options;
    options.t0 = 0.9;
    options.xi0 = 0.9;
    const loops::LoopCertificate cert =
        loops::build_global_loop(spec, pt2(0.3, 0.5), options);
    CHECK(cert.kind == "global-lorentzian");
    CHECK(loops::validate_certificate(spec, cert).all_pass);
}

TEST_CASE("the validator rejects corrupted certificates") {
    const geom::MetricSpec spec = io::manifold_preset("toy-normal");
    loops::LoopOptions options;
    options.t0 = 1.0;
    options.xi0 = 1.0;
    const loops::LoopCertificate good = loops::build_local_loop(spec, pt2(0.0, 0.0), options);
    REQUIRE(loops::validate_certificate(spec, good).all_pass);

    SUBCASE("broken closure") {
        // The validator re-derives the residual from the stored samples, so
        // the samples themselves have to move to break it.
        loops::LoopCertificate cert = good;
        std::vector<curves::CurveSample> shifted = cert.segments[2].path.samples();
        shifted.back().point(1) += 0.01;
        cert.segments[2].path = curves::CurvePath::sampled(std::move(shifted));
        const loops::ValidationReport rep = loops::validate_certificate(spec, cert);
        CHECK_FALSE(rep.all_pass);
        CHECK_FALSE(item(rep, "closure").pass);
    }

    SUBCASE("segment replaced by a spacelike imposter") {
        loops::LoopCertificate cert = good;
        std::vector<curves::CurveSample> fake = cert.segments[0].path.samples();
        for (curves::CurveSample& s : fake) s.tangent = -s.tangent;  // wrong direction field
        for (std::size_t i = 0; i < fake.size(); ++i) fake[i].tangent(0) = 0.0;
        for (curves::CurveSample& s : fake) s.tangent(1) = 1.0;
        cert.segments[0].path = curves::CurvePath::sampled(std::move(fake));
        const loops::ValidationReport rep = loops::validate_certificate(spec, cert);
        CHECK_FALSE(rep.all_pass);
    }

    SUBCASE("crossing pushed off the degenerate set") {
        loops::LoopCertificate cert = good;
        cert.crossings[0].point(0) = 0.05;
        const loops::ValidationReport rep = loops::validate_certificate(spec, cert);
        CHECK_FALSE(rep.all_pass);
        CHECK_FALSE(item(rep, "crossing-degeneracy").pass);
    }

    SUBCASE("mislabeled loop class") {
        loops::LoopCertificate cert = good;
        cert.loop_class = "closed-pseudo-timelike";
        const loops::ValidationReport rep = loops::validate_certificate(spec, cert);
        CHECK_FALSE(rep.all_pass);
        CHECK_FALSE(item(rep, "loop-class").pass);
    }

    SUBCASE("wrong segment count") {
        loops::LoopCertificate cert = good;
        cert.segments.pop_back();
        const loops::ValidationReport rep = loops::validate_certificate(spec, cert);
        CHECK_FALSE(rep.all_pass);
        CHECK_FALSE(item(rep, "structure").pass);
    }
}

TEST_CASE("loop construction is deterministic") {
    const geom::MetricSpec spec = io::manifold_preset("toy-normal");
    loops::LoopOptions options;
    options.t0 = 1.0;
    options.xi0 = 1.0;
    const loops::LoopCertificate a = loops::build_local_loop(spec, pt2(0.0, 0.1), options);
    const loops::LoopCertificate b = loops::build_local_loop(spec, pt2(0.0, 0.1), options);
    REQUIRE(a.segments[0].path.samples().size() == b.segments[0].path.samples().size());
    for (std::size_t i = 0; i < a.segments[0].path.samples().size(); ++i)
        CHECK((a.segments[0].path.samples()[i].point - b.segments[0].path.samples()[i].point)
                  .norm() == 0.0);
    CHECK(a.closure_residual == b.closure_residual);
}
