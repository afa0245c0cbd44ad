#include "sigloop/io/cli.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sigloop/curves/fan.hpp"
#include "sigloop/curves/transport.hpp"
#include "sigloop/errors.hpp"
#include "sigloop/gap/gap.hpp"
#include "sigloop/io/json_io.hpp"
#include "sigloop/io/presets.hpp"
#include "sigloop/loops/loops.hpp"
#include "sigloop/rng.hpp"
#include "sigloop/tolerances.hpp"

namespace sigloop::io {

namespace {

using nlohmann::json;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::input: return 2;
        case ErrorKind::numerical: return 3;
        case ErrorKind::validation: return 4;
    }
    return 3;
}

const char* kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::input: return "input";
        case ErrorKind::numerical: return "numerical";
        case ErrorKind::validation: return "validation";
    }
    return "?";
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

geom::MetricSpec resolve_manifold(const std::string& arg) {
    if (arg.empty()) throw InvalidArgument("--manifold is required");
    if (is_manifold_preset(arg)) return manifold_preset(arg);
    return load_manifold(arg);
}

curves::CurvePath resolve_curve(const std::string& arg, const geom::MetricSpec& spec) {
    if (arg.empty()) throw InvalidArgument("--curve is required");
    if (is_curve_preset(arg)) return curves::CurvePath::symbolic(curve_preset(arg));
    return load_curve(arg, spec);
}

// The manifold argument may be omitted when the curve is a preset that knows
// its home manifold.
geom::MetricSpec resolve_manifold_for_curve(const std::string& manifold_arg,
                                            const std::string& curve_arg) {
    if (!manifold_arg.empty()) return resolve_manifold(manifold_arg);
    if (is_curve_preset(curve_arg)) return manifold_preset(curve_preset_manifold(curve_arg));
    throw InvalidArgument("--manifold is required");
}

geom::Vec parse_point(const std::string& text, int dim) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw InvalidArgument("cannot parse coordinate '" + item + "'");
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
            ++used;
        if (used != item.size())
            throw InvalidArgument("cannot parse coordinate '" + item + "'");
        values.push_back(v);
        pos = comma + 1;
        if (comma == text.size()) break;
    }
    if (static_cast<int>(values.size()) != dim)
        throw InvalidArgument("expected " + std::to_string(dim) + " comma-separated coordinates");
    geom::Vec p(dim);
    for (int i = 0; i < dim; ++i) p(i) = values[i];
    return p;
}

geom::Vec parse_center(const std::string& text, int sd) {
    if (text.empty()) return geom::Vec::Zero(sd);
    return parse_point(text, sd);
}

json vec_json(const geom::Vec& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

// --- worked-example artifacts -------------------------------------------------

double dray_time(double t) {
    const double T = (2.0 / 3.0) * std::sqrt(std::fabs(t) * std::fabs(t) * std::fabs(t));
    return t < 0.0 ? -T : (t > 0.0 ? T : 0.0);
}

std::string example_dray() {
    std::ostringstream os;
    os << "t,T\n";
    for (int k = 0; k <= 200; ++k) {
        const double t = -1.0 + k / 100.0;
        os << fmt(t) << "," << fmt(dray_time(t)) << "\n";
    }
    return os.str();
}

std::string example_gamma_divergence() {
    const geom::MetricSpec spec = manifold_preset("toy");
    const curves::SymbolicCurve gamma = curve_preset("toy-gamma");
    std::ostringstream os;
    os << "x,t,dx_ds,dt_ds_abs\n";
    geom::Vec point, tangent;
    for (int k = 0; k <= 120; ++k) {
        const double ax = 1.2 * std::pow(1e-4 / 1.2, k / 120.0);
        gamma.eval(-ax, &point, &tangent);
        const geom::Mat g = geom::metric_at(spec, point).g;
        const double speed2 = -tangent.dot(g * tangent);  // proper time rate squared
        const double root = std::sqrt(speed2);
        os << fmt(point(1)) << "," << fmt(point(0)) << ","
           << fmt(std::fabs(tangent(1)) / root) << "," << fmt(std::fabs(tangent(0)) / root)
           << "\n";
    }
    return os.str();
}

std::string example_samples_csv(const geom::MetricSpec& spec,
                                const curves::SymbolicCurve& curve) {
    const curves::CurvePath path = curves::sample_symbolic_curve(spec, curve, 201);
    std::ostringstream os;
    os << "u,t,x,T\n";
    for (const curves::CurveSample& s : path.samples())
        os << fmt(s.u) << "," << fmt(s.point(0)) << "," << fmt(s.point(1)) << ","
           << fmt(dray_time(s.point(0))) << "\n";
    return os.str();
}

std::vector<std::pair<std::string, std::string>> build_examples(const std::string& only) {
    std::vector<std::pair<std::string, std::string>> files;
    auto want = [&](const char* base) { return only.empty() || only == base; };

    if (want("dray-transform")) files.emplace_back("dray-transform.csv", example_dray());
    if (want("gamma-divergence"))
        files.emplace_back("gamma-divergence.csv", example_gamma_divergence());

    const bool alpha_wanted = want("alpha-gap") || want("alpha-samples") ||
                              want("alpha-classification");
    const bool gamma_wanted = want("gamma-gap") || want("gamma-samples") ||
                              want("gamma-classification");
    if (alpha_wanted || gamma_wanted) {
        const geom::MetricSpec toy = manifold_preset("toy");
        if (alpha_wanted) {
            const curves::SymbolicCurve alpha = curve_preset("toy-alpha");
            const gap::ClassificationOutcome outcome =
                gap::run_classification(toy, curves::CurvePath::symbolic(alpha), {});
            if (want("alpha-gap"))
                files.emplace_back("alpha-gap.csv", gap_table_csv(outcome.gap));
            if (want("alpha-samples"))
                files.emplace_back("alpha-samples.csv", example_samples_csv(toy, alpha));
            if (want("alpha-classification"))
                files.emplace_back("alpha-classification.json", classification_to_json(outcome));
        }
        if (gamma_wanted) {
            const curves::SymbolicCurve gamma = curve_preset("toy-gamma");
            const gap::ClassificationOutcome outcome =
                gap::run_classification(toy, curves::CurvePath::symbolic(gamma), {});
            if (want("gamma-gap"))
                files.emplace_back("gamma-gap.csv", gap_table_csv(outcome.gap));
            if (want("gamma-samples"))
                files.emplace_back("gamma-samples.csv", example_samples_csv(toy, gamma));
            if (want("gamma-classification"))
                files.emplace_back("gamma-classification.json", classification_to_json(outcome));
        }
    }
    if (files.empty()) throw InvalidArgument("unknown example '" + only + "'");
    return files;
}

// --- invariant suites for the check command ------------------------------------

struct SuiteResult {
    std::string name;
    long count = 0;
    bool pass = true;
    std::string detail;
};

curves::CurvePath straight_line_path(const geom::MetricSpec& spec, const geom::Vec& p0,
                                     const geom::Vec& p1, int count) {
    std::vector<curves::CurveSample> samples;
    samples.reserve(count);
    const geom::Vec d = p1 - p0;
    for (int k = 0; k < count; ++k) {
        const double u = static_cast<double>(k) / (count - 1);
        curves::CurveSample s;
        s.u = u;
        s.point = p0 + u * d;
        s.tangent = d;
        const geom::MetricValue mv = geom::metric_at(spec, s.point);
        s.det_g = mv.det;
        s.tag = mv.signature == geom::Signature::lorentzian
                    ? curves::SampleTag::lorentzian
                    : (mv.signature == geom::Signature::riemannian
                           ? curves::SampleTag::riemannian
                           : curves::SampleTag::on_h);
        samples.push_back(std::move(s));
    }
    return curves::CurvePath::sampled(std::move(samples));
}

SuiteResult suite_expression_gradients(SplitMix64& rng) {
    SuiteResult r{"expression-gradients", 0, true, ""};
    const std::vector<std::string> symbols{"t", "x"};
    const std::vector<std::string> sources{
        "(t^2) * x", "sin(t) + cos(x)", "sqrt(abs(t) + 1)", "exp(x / 2) * log(t + 3)",
        "min(t, x) + max(t, x)"};
    for (const std::string& src : sources) {
        const dsl::Expression expr = dsl::Expression::parse(src, symbols);
        for (int trial = 0; trial < 50; ++trial) {
            double t, x;
            do {
                t = rng.range(-2.0, 2.0);
                x = rng.range(-2.0, 2.0);
            } while (std::fabs(t - x) < 1e-3 || std::fabs(t) < 1e-3);
            const double vals[2] = {t, x};
            const dsl::Dual d = expr.evaluate_with_gradient(vals);
            for (int i = 0; i < 2; ++i) {
                double plus[2] = {t, x}, minus[2] = {t, x};
                const double h = 1e-6 * std::max(1.0, std::fabs(vals[i]));
                plus[i] += h;
                minus[i] -= h;
                const double fd = (expr.evaluate(plus) - expr.evaluate(minus)) / (2.0 * h);
                ++r.count;
                if (std::fabs(fd - d.partial(i)) > 1e-5 * (1.0 + std::fabs(fd))) {
                    r.pass = false;
                    r.detail = "gradient mismatch in '" + src + "'";
                }
            }
        }
    }
    return r;
}

SuiteResult suite_metric_compatibility(SplitMix64& rng) {
    SuiteResult r{"metric-compatibility", 0, true, ""};
    for (const char* name : {"toy", "desitter2d"}) {
        const geom::MetricSpec spec = manifold_preset(name);
        const bool negative_band = std::string(name) == "toy";
        for (int trial = 0; trial < 5; ++trial) {
            const double lo = negative_band ? -1.5 : 0.05;
            const double hi = negative_band ? -0.05 : 1.5;
            geom::Vec p0(2), p1(2);
            p0 << rng.range(lo, hi), rng.range(-1.0, 1.0);
            p1 << rng.range(lo, hi), rng.range(-1.0, 1.0);
            const curves::CurvePath path = straight_line_path(spec, p0, p1, 51);
            std::vector<double> grid;
            for (const curves::CurveSample& s : path.samples()) grid.push_back(s.u);
            const geom::Mat frame0 = gap::default_frame(spec, p0);
            const curves::ParallelFrame pf =
                curves::integrate_transport(spec, path, frame0, 0.0, grid, {});
            geom::Mat target;
            bool first = true;
            for (const curves::FrameSample& fs : pf.samples) {
                const geom::Mat g = geom::metric_at(spec, fs.point).g;
                const geom::Mat products = fs.frame.transpose() * g * fs.frame;
                if (first) {
                    target = products;
                    first = false;
                }
                ++r.count;
                if ((products - target).cwiseAbs().maxCoeff() > 1e-6) {
                    r.pass = false;
                    r.detail = std::string("inner products drifted on ") + name;
                }
            }
        }
    }
    return r;
}

SuiteResult suite_null_fan(SplitMix64& rng) {
    SuiteResult r{"null-fan-residual", 0, true, ""};
    for (const char* name : {"toy-normal", "desitter2d"}) {
        const geom::MetricSpec spec = manifold_preset(name);
        for (int trial = 0; trial < 3; ++trial) {
            geom::Vec seed(2);
            seed << 0.3 + 1.2 * rng.unit(), rng.symmetric();
            const curves::FanResult fan =
                curves::integrate_null_fan(spec, seed, 2, curves::Orientation::past);
            for (const curves::FanDirection& dir : fan.directions) {
                for (const curves::CurveSample& s : dir.curve.samples()) {
                    const geom::Mat g = geom::metric_at(spec, s.point).g;
                    const double residual = std::fabs(s.tangent.dot(g * s.tangent));
                    ++r.count;
                    if (residual > tol::kNullResidual) {
                        r.pass = false;
                        r.detail = std::string("null residual ") + fmt(residual) + " on " + name;
                    }
                }
            }
        }
    }
    return r;
}

SuiteResult suite_containment(SplitMix64& rng, bool inject_bad_g0) {
    SuiteResult r{"cone-containment", 0, true, ""};
    for (const char* name : {"toy-normal", "desitter2d", "aniso3d"}) {
        const geom::MetricSpec spec = manifold_preset(name);
        loops::CompactBox box;
        box.t0 = 1.0;
        box.center = geom::Vec::Zero(spec.dimension() - 1);
        box.xi0 = 0.8;
        loops::ComparisonMetric comparison = loops::minimize_spatial_form(spec, box, 16);
        if (inject_bad_g0) comparison.G0 *= 2.0;
        try {
            const loops::ContainmentReport rep =
                loops::cone_containment_check(spec, comparison, box, 2000, rng.next());
            r.count += rep.samples;
        } catch (const ContainmentViolated& e) {
            r.pass = false;
            r.detail = e.what();
        }
    }
    return r;
}

SuiteResult suite_gap_invariance(SplitMix64& rng) {
    SuiteResult r{"gap-invariance", 0, true, ""};
    const geom::MetricSpec spec = manifold_preset("toy");
    const curves::CurvePath path = curves::CurvePath::symbolic(curve_preset("toy-alpha"));
    const gap::ClassificationOutcome base = gap::run_classification(spec, path, {});

    geom::Mat frame0;
    bool found = false;
    for (const curves::FrameSample& fs : base.frame.samples)
        if (std::fabs(fs.u - base.u0) < 1e-12) {
            frame0 = fs.frame;
            found = true;
        }
    if (!found) {
        r.pass = false;
        r.detail = "anchor frame not found";
        return r;
    }

    for (int trial = 0; trial < 10; ++trial) {
        geom::Mat B(2, 2);
        do {
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) B(i, j) = 2.0 * rng.symmetric();
        } while (std::fabs(B.determinant()) < 0.3);
        gap::ClassifyOptions opts;
        opts.initial_frame = frame0 * B;
        const gap::ClassificationOutcome other = gap::run_classification(spec, path, opts);
        const gap::InvarianceReport inv =
            gap::check_basis_invariance(base.gap, other.gap, B);
        r.count += inv.compared_samples;
        if (!inv.ok || other.report.verdict != base.report.verdict) {
            r.pass = false;
            r.detail = "invariance bound or verdict failed";
        }
    }
    return r;
}

// --- subcommand bodies ----------------------------------------------------------

struct Cli {
    std::ostream& out;
    std::ostream& err;
    int status = 0;
};

void do_classify(Cli& cli, const std::string& manifold_arg, const std::string& curve_arg,
                 double threshold, int samples, const std::string& out_path,
                 const std::string& csv_path) {
    const geom::MetricSpec spec = resolve_manifold_for_curve(manifold_arg, curve_arg);
    const curves::CurvePath path = resolve_curve(curve_arg, spec);
    gap::ClassifyOptions opts;
    opts.threshold = threshold;
    opts.sample_count = samples;
    const gap::ClassificationOutcome outcome = gap::run_classification(spec, path, opts);
    const std::string text = classification_to_json(outcome);
    if (!out_path.empty()) write_text(out_path, text);
    if (!csv_path.empty()) write_text(csv_path, gap_table_csv(outcome.gap));
    cli.out << text;
}

void do_gap(Cli& cli, const std::string& manifold_arg, const std::string& curve_arg,
            int samples, const std::string& out_path) {
    const geom::MetricSpec spec = resolve_manifold_for_curve(manifold_arg, curve_arg);
    const curves::CurvePath path = resolve_curve(curve_arg, spec);
    gap::ClassifyOptions opts;
    opts.sample_count = samples;
    const gap::ClassificationOutcome outcome = gap::run_classification(spec, path, opts);
    const std::string csv = gap_table_csv(outcome.gap);
    if (out_path.empty()) {
        cli.out << csv;
        return;
    }
    write_text(out_path, csv);
    json j;
    j["command"] = "gap";
    j["mu_span"] = outcome.gap.samples.back().mu - outcome.gap.samples.front().mu;
    j["outputs"] = json::array({out_path});
    cli.out << j.dump(2) << "\n";
}

void do_transport(Cli& cli, const std::string& manifold_arg, const std::string& curve_arg,
                  int samples, const std::string& out_path) {
    const geom::MetricSpec spec = resolve_manifold_for_curve(manifold_arg, curve_arg);
    const curves::CurvePath path = resolve_curve(curve_arg, spec);
    gap::ClassifyOptions opts;
    opts.sample_count = samples;
    const gap::ClassificationOutcome outcome = gap::run_classification(spec, path, opts);

    std::ostringstream os;
    const int n = spec.dimension();
    os << "u";
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i) os << ",e" << a << "_" << spec.coordinates()[i];
    os << ",frame_det,det_g\n";
    for (const curves::FrameSample& fs : outcome.frame.samples) {
        os << fmt(fs.u);
        for (int a = 0; a < n; ++a)
            for (int i = 0; i < n; ++i) os << "," << fmt(fs.frame(i, a));
        os << "," << fmt(fs.frame_det) << "," << fmt(fs.det_g) << "\n";
    }
    const std::string csv = os.str();
    if (out_path.empty()) {
        cli.out << csv;
        return;
    }
    write_text(out_path, csv);
    json j;
    j["command"] = "transport";
    j["status"] = outcome.frame.status == curves::TransportStatus::hit_hypersurface
                      ? "hit-hypersurface"
                      : "completed";
    j["outputs"] = json::array({out_path});
    cli.out << j.dump(2) << "\n";
}

void do_cones(Cli& cli, const std::string& manifold_arg, const std::string& center_arg,
              double t0, double xi0, int grid, int samples, std::uint64_t seed,
              bool inject_bad_g0, const std::string& out_path) {
    const geom::MetricSpec spec = resolve_manifold(manifold_arg);
    loops::CompactBox box;
    box.t0 = t0;
    box.xi0 = xi0;
    box.center = parse_center(center_arg, spec.dimension() - 1);
    loops::ComparisonMetric comparison = loops::minimize_spatial_form(spec, box, grid);
    if (inject_bad_g0) comparison.G0 *= 2.0;
    const geom::Vec apex = loops::choose_apex(comparison, box);
    const loops::ContainmentReport report =
        loops::cone_containment_check(spec, comparison, box, samples, seed);

    json j;
    j["command"] = "cones";
    j["g0"] = comparison.G0;
    j["minimizer_point"] = vec_json(comparison.minimizer_point);
    j["minimizer_direction"] = vec_json(comparison.minimizer_direction);
    j["apex"] = vec_json(apex);
    json c;
    c["samples"] = report.samples;
    c["min_value"] = report.min_value;
    j["containment"] = std::move(c);
    j["seed"] = seed;
    const std::string text = j.dump(2) + "\n";
    if (!out_path.empty()) write_text(out_path, text);
    cli.out << text;
}

void do_loop(Cli& cli, bool global, const std::string& manifold_arg,
             const std::string& point_arg, double t0, double xi0, double cone_fraction,
             int grid, const std::string& out_path) {
    const geom::MetricSpec spec = resolve_manifold(manifold_arg);
    const geom::Vec base = parse_point(point_arg, spec.dimension());
    loops::LoopOptions opts;
    opts.t0 = t0;
    opts.xi0 = xi0;
    opts.cone_fraction = cone_fraction;
    opts.grid_resolution = grid;
    const loops::LoopCertificate cert = global ? loops::build_global_loop(spec, base, opts)
                                               : loops::build_local_loop(spec, base, opts);
    const loops::ValidationReport val = loops::validate_certificate(spec, cert);
    if (!out_path.empty()) write_text(out_path, certificate_to_json(cert, &val));
    cli.out << validation_to_json(val);
    if (!val.all_pass) cli.status = 4;
}

void do_examples(Cli& cli, const std::string& name, const std::string& out_dir) {
    const auto files = build_examples(name);
    json outputs = json::array();
    for (const auto& [file, content] : files) {
        const std::string path = out_dir.empty() ? file : out_dir + "/" + file;
        write_text(path, content);
        outputs.push_back(path);
    }
    json j;
    j["command"] = "examples";
    j["outputs"] = std::move(outputs);
    cli.out << j.dump(2) << "\n";
}

void do_check(Cli& cli, std::uint64_t seed, bool inject_bad_g0) {
    SplitMix64 rng(seed);
    std::vector<SuiteResult> suites;
    suites.push_back(suite_expression_gradients(rng));
    suites.push_back(suite_metric_compatibility(rng));
    suites.push_back(suite_null_fan(rng));
    suites.push_back(suite_containment(rng, inject_bad_g0));
    suites.push_back(suite_gap_invariance(rng));

    bool all_pass = true;
    json arr = json::array();
    for (const SuiteResult& s : suites) {
        all_pass &= s.pass;
        json j;
        j["name"] = s.name;
        j["count"] = s.count;
        j["pass"] = s.pass;
        j["detail"] = s.detail;
        arr.push_back(std::move(j));
    }
    json j;
    j["command"] = "check";
    j["seed"] = seed;
    j["suites"] = std::move(arr);
    j["all_pass"] = all_pass;
    cli.out << j.dump(2) << "\n";
    if (!all_pass) cli.status = 4;
}

void do_validate(Cli& cli, const std::string& manifold_arg, const std::string& cert_path) {
    const geom::MetricSpec spec = resolve_manifold(manifold_arg);
    const loops::LoopCertificate cert = certificate_from_json(read_text(cert_path));
    const loops::ValidationReport val = loops::validate_certificate(spec, cert);
    cli.out << validation_to_json(val);
    if (!val.all_pass) cli.status = 4;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"toolkit for metrics that change signature across a hypersurface"};
    app.require_subcommand(1);

    std::string manifold_arg, curve_arg, point_arg, center_arg, out_path, csv_path,
        cert_path, example_name, out_dir;
    double threshold = tol::kClassifyThreshold;
    double t0 = 1.0, xi0 = 0.0, cone_fraction = tol::kConeFraction;
    int samples = 401, grid = 32, containment_samples = 10000;
    std::uint64_t seed = 1;
    bool inject_bad_g0 = false;

    CLI::App* c_classify = app.add_subcommand("classify", "classify a curve by its GAP norm");
    c_classify->add_option("--manifold", manifold_arg, "manifold file or preset");
    c_classify->add_option("--curve", curve_arg, "curve file or preset")->required();
    c_classify->add_option("--threshold", threshold, "classification threshold");
    c_classify->add_option("--samples", samples, "sample count for symbolic curves");
    c_classify->add_option("--out", out_path, "write the report JSON here");
    c_classify->add_option("--csv", csv_path, "write the q(mu) table here");

    CLI::App* c_gap = app.add_subcommand("gap", "tabulate the generalized affine parameter");
    c_gap->add_option("--manifold", manifold_arg, "manifold file or preset");
    c_gap->add_option("--curve", curve_arg, "curve file or preset")->required();
    c_gap->add_option("--samples", samples, "sample count for symbolic curves");
    c_gap->add_option("--out", out_path, "write the CSV here");

    CLI::App* c_transport = app.add_subcommand("transport", "parallel-transport a frame");
    c_transport->add_option("--manifold", manifold_arg, "manifold file or preset");
    c_transport->add_option("--curve", curve_arg, "curve file or preset")->required();
    c_transport->add_option("--samples", samples, "sample count for symbolic curves");
    c_transport->add_option("--out", out_path, "write the CSV here");

    CLI::App* c_cones = app.add_subcommand("cones", "comparison metric and cone containment");
    c_cones->add_option("--manifold", manifold_arg, "manifold file or preset")->required();
    c_cones->add_option("--center", center_arg, "box center (spatial coordinates)");
    c_cones->add_option("--t0", t0, "box height");
    c_cones->add_option("--xi0", xi0, "box radius")->required();
    c_cones->add_option("--grid", grid, "minimization grid resolution");
    c_cones->add_option("--samples", containment_samples, "containment sample count");
    c_cones->add_option("--seed", seed, "random seed");
    c_cones->add_flag("--inject-bad-g0", inject_bad_g0,
                      "double G0 to demonstrate a containment failure");
    c_cones->add_option("--out", out_path, "write the JSON summary here");

    CLI::App* c_loop_local =
        app.add_subcommand("loop-local", "build a pseudo-timelike loop near a degeneracy point");
    c_loop_local->add_option("--manifold", manifold_arg, "manifold file or preset")->required();
    c_loop_local->add_option("--point", point_arg, "base point coordinates")->required();
    c_loop_local->add_option("--t0", t0, "box height");
    c_loop_local->add_option("--xi0", xi0, "box radius (0 = automatic)");
    c_loop_local->add_option("--cone-fraction", cone_fraction, "timelike speed fraction");
    c_loop_local->add_option("--grid", grid, "minimization grid resolution");
    c_loop_local->add_option("--out", out_path, "write the certificate JSON here");

    CLI::App* c_loop_global =
        app.add_subcommand("loop-global", "build a pseudo-timelike loop through any point");
    c_loop_global->add_option("--manifold", manifold_arg, "manifold file or preset")->required();
    c_loop_global->add_option("--point", point_arg, "base point coordinates")->required();
    c_loop_global->add_option("--t0", t0, "box height");
    c_loop_global->add_option("--xi0", xi0, "box radius (0 = automatic)");
    c_loop_global->add_option("--cone-fraction", cone_fraction, "timelike speed fraction");
    c_loop_global->add_option("--grid", grid, "minimization grid resolution");
    c_loop_global->add_option("--out", out_path, "write the certificate JSON here");

    CLI::App* c_examples = app.add_subcommand("examples", "regenerate worked-example artifacts");
    c_examples->add_option("--name", example_name, "single artifact to regenerate");
    c_examples->add_option("--out", out_dir, "output directory");

    CLI::App* c_check = app.add_subcommand("check", "run the invariant property suites");
    c_check->add_option("--seed", seed, "random seed");
    c_check->add_flag("--inject-bad-g0", inject_bad_g0,
                      "corrupt the containment bound to demonstrate a failure");

    CLI::App* c_validate = app.add_subcommand("validate", "revalidate a loop certificate");
    c_validate->add_option("--manifold", manifold_arg, "manifold file or preset")->required();
    c_validate->add_option("--cert", cert_path, "certificate JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    }

    Cli cli{out, err, 0};
    try {
        if (c_classify->parsed())
            do_classify(cli, manifold_arg, curve_arg, threshold, samples, out_path, csv_path);
        else if (c_gap->parsed())
            do_gap(cli, manifold_arg, curve_arg, samples, out_path);
        else if (c_transport->parsed())
            do_transport(cli, manifold_arg, curve_arg, samples, out_path);
        else if (c_cones->parsed())
            do_cones(cli, manifold_arg, center_arg, t0, xi0, grid, containment_samples, seed,
                     inject_bad_g0, out_path);
        else if (c_loop_local->parsed())
            do_loop(cli, false, manifold_arg, point_arg, t0, xi0, cone_fraction, grid, out_path);
        else if (c_loop_global->parsed())
            do_loop(cli, true, manifold_arg, point_arg, t0, xi0, cone_fraction, grid, out_path);
        else if (c_examples->parsed())
            do_examples(cli, example_name, out_dir);
        else if (c_check->parsed())
            do_check(cli, seed, inject_bad_g0);
        else if (c_validate->parsed())
            do_validate(cli, manifold_arg, cert_path);
    } catch (const Error& e) {
        json j;
        json inner;
        inner["code"] = e.code();
        inner["kind"] = kind_name(e.kind());
        inner["message"] = e.what();
        j["error"] = std::move(inner);
        out << j.dump(2) << "\n";
        err << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
    return cli.status;
}

}  // namespace sigloop::io
