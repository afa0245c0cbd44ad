#include "sigloop/io/presets.hpp"

#include <algorithm>
#include <map>

#include "sigloop/errors.hpp"

namespace sigloop::io {

namespace {

geom::MetricSpec make_manifold(const std::string& name) {
    using M = std::map<std::pair<int, int>, std::string>;
    if (name == "toy")  // Lorentzian at t < 0, Riemannian at t > 0
        return geom::MetricSpec::create({"t", "x"}, M{{{0, 0}, "t"}, {{1, 1}, "1"}}, false);
    if (name == "toy-normal")  // the same signature flip written in the normal form
        return geom::MetricSpec::create({"t", "x"}, M{{{0, 0}, "-t"}, {{1, 1}, "1"}}, true);
    if (name == "desitter2d")  // hemisphere glued to expanding half-de-Sitter
        return geom::MetricSpec::create(
            {"t", "x"}, M{{{0, 0}, "-t"}, {{1, 1}, "(1 + ((t^2) / 4))^2"}}, true);
    if (name == "flat")  // no signature change at all
        return geom::MetricSpec::create({"t", "x"}, M{{{0, 0}, "-1"}, {{1, 1}, "1"}}, false);
    if (name == "tangent-radical")  // kernel tangent to {det g = 0}; the excluded case
        return geom::MetricSpec::create({"t", "x"}, M{{{0, 0}, "1"}, {{1, 1}, "t"}}, false);
    if (name == "aniso3d")  // anisotropic spatial form, minimum 1 on the x = 0 slice
        return geom::MetricSpec::create(
            {"t", "x", "y"},
            M{{{0, 0}, "-t"}, {{1, 1}, "2"}, {{2, 2}, "1 + (x^2)"}}, true);
    throw InvalidArgument("unknown manifold preset '" + name + "'");
}

curves::SymbolicCurve make_curve(const std::string& name) {
    curves::SymbolicCurve c;
    c.parameter = "u";
    if (name == "toy-gamma") {
        // Timelike solution of dt/dx = -sqrt(|t|) approaching the degeneracy;
        // tan(u) = -(2/3)|t|^{3/2} inverts the closed form.
        c.a = -1.2;
        c.b = -1e-4;
        c.components.push_back(
            dsl::Expression::parse("sgn(u) * (abs((3/2) * tan(u))^(2/3))", {"u"}));
        c.components.push_back(dsl::Expression::parse("u", {"u"}));
        return c;
    }
    if (name == "toy-alpha") {
        // Vertical line x = 0, t from -1 to the degeneracy.
        c.a = -1.0;
        c.b = 0.0;
        c.components.push_back(dsl::Expression::parse("u", {"u"}));
        c.components.push_back(dsl::Expression::parse("0", {"u"}));
        return c;
    }
    if (name == "flat-line") {
        c.a = 0.0;
        c.b = 1.0;
        c.components.push_back(dsl::Expression::parse("u", {"u"}));
        c.components.push_back(dsl::Expression::parse("u / 2", {"u"}));
        return c;
    }
    throw InvalidArgument("unknown curve preset '" + name + "'");
}

}  // namespace

const std::vector<std::string>& manifold_preset_names() {
    static const std::vector<std::string> names{"toy",      "toy-normal",      "desitter2d",
                                                "flat",     "tangent-radical", "aniso3d"};
    return names;
}

const std::vector<std::string>& curve_preset_names() {
    static const std::vector<std::string> names{"toy-gamma", "toy-alpha", "flat-line"};
    return names;
}

bool is_manifold_preset(const std::string& name) {
    const auto& names = manifold_preset_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

bool is_curve_preset(const std::string& name) {
    const auto& names = curve_preset_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

geom::MetricSpec manifold_preset(const std::string& name) { return make_manifold(name); }

curves::SymbolicCurve curve_preset(const std::string& name) { return make_curve(name); }

std::string curve_preset_manifold(const std::string& name) {
    if (name == "toy-gamma" || name == "toy-alpha") return "toy";
    if (name == "flat-line") return "flat";
    throw InvalidArgument("unknown curve preset '" + name + "'");
}

}  // namespace sigloop::io
