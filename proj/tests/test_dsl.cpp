#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sigloop/dsl/expression.hpp"
#include "sigloop/errors.hpp"
#include "sigloop/rng.hpp"

using sigloop::dsl::Dual;
using sigloop::dsl::Expression;

namespace {

double eval1(const std::string& src, double t) {
    const double p[1] = {t};
    return Expression::parse(src, {"t"}).evaluate(p);
}

double eval2(const std::string& src, double t, double x) {
    const double p[2] = {t, x};
    return Expression::parse(src, {"t", "x"}).evaluate(p);
}

}  // namespace

TEST_CASE("arithmetic precedence and grouping") {
    CHECK(eval1("3 + 4 * 2", 0.0) == doctest::Approx(11.0));
    CHECK(eval1("(3 + 4) * 2", 0.0) == doctest::Approx(14.0));
    CHECK(eval1("2^3", 0.0) == doctest::Approx(8.0));
    CHECK(eval1("2^3 * 2", 0.0) == doctest::Approx(16.0));
    CHECK(eval1("7 - 4 - 2", 0.0) == doctest::Approx(1.0));  // left associative
    CHECK(eval1("8 / 4 / 2", 0.0) == doctest::Approx(1.0));
    CHECK(eval1("-t + 1", 3.0) == doctest::Approx(-2.0));
    CHECK(eval1("(-t)^2", 3.0) == doctest::Approx(9.0));
    CHECK(eval1("1.5e2 + 1e-2", 0.0) == doctest::Approx(150.01));
}

TEST_CASE("function evaluation") {
    CHECK(eval1("sqrt(t)", 4.0) == doctest::Approx(2.0));
    CHECK(eval1("abs(t)", -3.0) == doctest::Approx(3.0));
    CHECK(eval1("sgn(t)", -2.0) == doctest::Approx(-1.0));
    CHECK(eval1("sgn(t)", 0.0) == doctest::Approx(0.0));
    CHECK(eval1("sin(t)", 0.0) == doctest::Approx(0.0));
    CHECK(eval1("cos(t)", 0.0) == doctest::Approx(1.0));
    CHECK(eval1("tan(t)", std::atan(1.0)) == doctest::Approx(1.0));
    CHECK(eval1("arctan(t)", 1.0) == doctest::Approx(std::atan(1.0)));
    CHECK(eval1("exp(t)", 1.0) == doctest::Approx(std::exp(1.0)));
    CHECK(eval1("log(t)", std::exp(2.0)) == doctest::Approx(2.0));
    CHECK(eval2("min(t, x)", 2.0, 3.0) == doctest::Approx(2.0));
    CHECK(eval2("max(t, x)", 2.0, 3.0) == doctest::Approx(3.0));
    // Negative bases are fine for integer exponents.
    CHECK(eval1("t^3", -2.0) == doctest::Approx(-8.0));
    CHECK(eval1("t^2", -2.0) == doctest::Approx(4.0));
    CHECK(eval1("abs(t)^(2/3)", -8.0) == doctest::Approx(4.0));
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(Expression::parse("t +", {"t"}), sigloop::SyntaxError);
    CHECK_THROWS_AS(Expression::parse("(t", {"t"}), sigloop::SyntaxError);
    CHECK_THROWS_AS(Expression::parse("t @ 1", {"t"}), sigloop::SyntaxError);
    CHECK_THROWS_AS(Expression::parse("t 1", {"t"}), sigloop::SyntaxError);
    CHECK_THROWS_AS(Expression::parse("y + 1", {"t"}), sigloop::UnknownSymbol);
    CHECK_THROWS_AS(Expression::parse("foo(t)", {"t"}), sigloop::UnknownSymbol);
    // An exponent has to fold to a constant so power-rule differentiation is exact.
    CHECK_THROWS_AS(Expression::parse("t^x", {"t", "x"}), sigloop::SyntaxError);
    CHECK_NOTHROW(Expression::parse("t^(1 + 1)", {"t"}));
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(eval1("sqrt(t)", -1.0), sigloop::DomainError);
    CHECK_THROWS_AS(eval1("log(t)", 0.0), sigloop::DomainError);
    CHECK_THROWS_AS(eval1("log(t)", -2.0), sigloop::DomainError);
    CHECK_THROWS_AS(eval1("1 / t", 0.0), sigloop::DomainError);
    CHECK_THROWS_AS(eval1("t^(1/2)", -1.0), sigloop::DomainError);
    CHECK_THROWS_AS(eval1("t^(0 - 1)", 0.0), sigloop::DomainError);
}

TEST_CASE("gradient oracles") {
    const std::vector<std::string> symbols{"t", "x"};
    const Expression e = Expression::parse("(t^2) * x", symbols);
    const double p[2] = {3.0, 2.0};
    const Dual d = e.evaluate_with_gradient(p);
    CHECK(d.value() == doctest::Approx(18.0));
    CHECK(d.partial(0) == doctest::Approx(12.0));
    CHECK(d.partial(1) == doctest::Approx(9.0));

    const Expression chain = Expression::parse("exp(sin(t))", {"t"});
    const double q[1] = {0.7};
    const Dual dc = chain.evaluate_with_gradient(q);
    CHECK(dc.value() == doctest::Approx(std::exp(std::sin(0.7))));
    CHECK(dc.partial(0) == doctest::Approx(std::cos(0.7) * std::exp(std::sin(0.7))));

    const Expression cube = Expression::parse("t^3", {"t"});
    const double r[1] = {-2.0};
    CHECK(cube.evaluate_with_gradient(r).partial(0) == doctest::Approx(12.0));

    const Expression root = Expression::parse("sqrt(t)", {"t"});
    const double s[1] = {4.0};
    CHECK(root.evaluate_with_gradient(s).partial(0) == doctest::Approx(0.25));
}

TEST_CASE("kinks differentiate away from the kink and throw at it") {
    const Expression a = Expression::parse("abs(t)", {"t"});
    const double neg[1] = {-2.0}, pos[1] = {2.0}, zero[1] = {0.0};
    CHECK(a.evaluate_with_gradient(neg).partial(0) == doctest::Approx(-1.0));
    CHECK(a.evaluate_with_gradient(pos).partial(0) == doctest::Approx(1.0));
    CHECK(a.evaluate(zero) == doctest::Approx(0.0));  // plain evaluation is fine
    CHECK_THROWS_AS(a.evaluate_with_gradient(zero), sigloop::NonDifferentiable);

    const Expression s = Expression::parse("sgn(t)", {"t"});
    CHECK(s.evaluate_with_gradient(pos).partial(0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(s.evaluate_with_gradient(zero), sigloop::NonDifferentiable);

    const Expression m = Expression::parse("min(t, x)", {"t", "x"});
    const double off[2] = {1.0, 2.0}, tie[2] = {2.0, 2.0};
    const Dual dm = m.evaluate_with_gradient(off);
    CHECK(dm.partial(0) == doctest::Approx(1.0));
    CHECK(dm.partial(1) == doctest::Approx(0.0));
    CHECK_THROWS_AS(m.evaluate_with_gradient(tie), sigloop::NonDifferentiable);

    // A tie whose two branches agree to first order is not a kink.
    const Expression same = Expression::parse("min(t, t)", {"t"});
    CHECK(same.evaluate_with_gradient(pos).partial(0) == doctest::Approx(1.0));
}

TEST_CASE("gradients match finite differences on random points") {
    const std::vector<std::string> symbols{"t", "x"};
    const std::vector<std::string> sources{
        "t^3 - 2 * t * x",
        "arctan(t) * exp(x)",
        "tan(t / 4) + x^2",
        "log(abs(t) + 2)",
        "sin(t * x) / (2 + cos(x))",
    };
    sigloop::SplitMix64 rng(20240811);
    for (const std::string& src : sources) {
        const Expression e = Expression::parse(src, symbols);
        for (int trial = 0; trial < 100; ++trial) {
            double p[2];
            do {
                p[0] = rng.range(-2.0, 2.0);
                p[1] = rng.range(-2.0, 2.0);
            } while (std::fabs(p[0]) < 1e-3);
            const Dual d = e.evaluate_with_gradient(p);
            for (int i = 0; i < 2; ++i) {
                double hi[2] = {p[0], p[1]}, lo[2] = {p[0], p[1]};
                const double h = 1e-6 * std::max(1.0, std::fabs(p[i]));
                hi[i] += h;
                lo[i] -= h;
                const double fd = (e.evaluate(hi) - e.evaluate(lo)) / (2.0 * h);
                CHECK(d.partial(i) == doctest::Approx(fd).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("print round-trips through the parser") {
    const std::vector<std::string> symbols{"t", "x"};
    const std::vector<std::string> sources{
        "(t^2) * x - 3 / (x + 4)",
        "min(sin(t), max(x, 0 - t))",
        "sqrt(abs(t * x) + 1)",
    };
    sigloop::SplitMix64 rng(7);
    for (const std::string& src : sources) {
        const Expression e = Expression::parse(src, symbols);
        const Expression back = Expression::parse(e.print(), symbols);
        CHECK(e.equals(back));
        for (int trial = 0; trial < 20; ++trial) {
            const double p[2] = {rng.range(-2.0, 2.0), rng.range(-2.0, 2.0)};
            CHECK(e.evaluate(p) == doctest::Approx(back.evaluate(p)).epsilon(1e-14));
        }
    }
}

TEST_CASE("constants fold") {
    const Expression c = Expression::parse("3 * 4 + 2^2", {"t"});
    CHECK(c.is_constant());
    const double p[1] = {99.0};
    CHECK(c.evaluate(p) == doctest::Approx(16.0));
    CHECK_FALSE(Expression::parse("t + 0", {"t"}).is_constant());
}

TEST_CASE("structural equality") {
    const Expression a = Expression::parse("-t", {"t", "x"});
    CHECK(a.equals(Expression::parse("-t", {"t", "x"})));
    CHECK_FALSE(a.equals(Expression::parse("t", {"t", "x"})));
    CHECK_FALSE(a.equals(Expression::parse("-x", {"t", "x"})));
}
