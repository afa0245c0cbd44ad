#include "sigloop/io/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "sigloop/errors.hpp"

namespace sigloop::io {

namespace {

using nlohmann::json;

json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

json vec_to_json(const geom::Vec& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

geom::Vec vec_from_json(const json& arr, const char* what) {
    if (!arr.is_array() || arr.empty())
        throw InvalidArgument(std::string(what) + " must be a nonempty array");
    geom::Vec v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<int>(i)) = arr[i].get<double>();
    return v;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const std::exception& e) {
        throw InvalidArgument(std::string(what) + ": invalid JSON: " + e.what());
    }
}

gap::Verdict verdict_from_name(const std::string& name) {
    using gap::Verdict;
    for (Verdict v : {Verdict::pseudo_timelike, Verdict::pseudo_spacelike,
                      Verdict::pseudo_lightlike, Verdict::asymptotically_lightlike,
                      Verdict::mixed_unclassified, Verdict::pseudo_timelike_vacuous})
        if (name == gap::verdict_name(v)) return v;
    throw InvalidArgument("unknown verdict '" + name + "'");
}

curves::SampleTag tag_from_name(const std::string& name) {
    using curves::SampleTag;
    for (SampleTag t : {SampleTag::lorentzian, SampleTag::riemannian, SampleTag::on_h})
        if (name == curves::sample_tag_name(t)) return t;
    throw InvalidArgument("unknown sample tag '" + name + "'");
}

loops::SegmentRole role_from_name(const std::string& name) {
    using loops::SegmentRole;
    for (SegmentRole r : {SegmentRole::lorentzian_past, SegmentRole::lorentzian_future,
                          SegmentRole::riemannian_connector})
        if (name == loops::segment_role_name(r)) return r;
    throw InvalidArgument("unknown segment role '" + name + "'");
}

geom::RadicalVerdict radical_from_name(const std::string& name) {
    using geom::RadicalVerdict;
    for (RadicalVerdict v :
         {RadicalVerdict::transverse, RadicalVerdict::tangent, RadicalVerdict::indeterminate})
        if (name == geom::radical_verdict_name(v)) return v;
    throw InvalidArgument("unknown radical verdict '" + name + "'");
}

json samples_to_json(const std::vector<curves::CurveSample>& samples) {
    json arr = json::array();
    for (const curves::CurveSample& s : samples) {
        json j;
        j["u"] = s.u;
        j["point"] = vec_to_json(s.point);
        j["tangent"] = vec_to_json(s.tangent);
        j["tag"] = curves::sample_tag_name(s.tag);
        j["det_g"] = s.det_g;
        arr.push_back(std::move(j));
    }
    return arr;
}

std::vector<curves::CurveSample> samples_from_json(const json& arr) {
    if (!arr.is_array()) throw InvalidArgument("samples must be an array");
    std::vector<curves::CurveSample> samples;
    samples.reserve(arr.size());
    for (const json& j : arr) {
        curves::CurveSample s;
        s.u = j.at("u").get<double>();
        s.point = vec_from_json(j.at("point"), "sample point");
        s.tangent = vec_from_json(j.at("tangent"), "sample tangent");
        s.tag = tag_from_name(j.at("tag").get<std::string>());
        s.det_g = j.at("det_g").get<double>();
        samples.push_back(std::move(s));
    }
    return samples;
}

json report_to_json_obj(const gap::ClassificationReport& report) {
    json j;
    j["verdict"] = gap::verdict_name(report.verdict);
    j["margin"] = finite_or_null(report.margin);
    j["sup_q"] = finite_or_null(report.sup_q);
    j["inf_q"] = finite_or_null(report.inf_q);
    json limits;
    limits["approaches_left"] = report.approaches_left;
    limits["approaches_right"] = report.approaches_right;
    limits["left"] = report.limit_left ? json(*report.limit_left) : json(nullptr);
    limits["right"] = report.limit_right ? json(*report.limit_right) : json(nullptr);
    j["limits"] = std::move(limits);
    json tols;
    tols["threshold"] = report.threshold;
    j["tolerances"] = std::move(tols);
    json segs = json::array();
    for (const gap::SegmentDiagnostic& seg : report.segments) {
        json s;
        s["tag"] = curves::sample_tag_name(seg.tag);
        s["count"] = seg.count;
        s["u_begin"] = seg.u_begin;
        s["u_end"] = seg.u_end;
        s["q_min"] = finite_or_null(seg.q_min);
        s["q_max"] = finite_or_null(seg.q_max);
        segs.push_back(std::move(s));
    }
    j["segments"] = std::move(segs);
    return j;
}

gap::ClassificationReport report_from_json_obj(const json& j) {
    gap::ClassificationReport report;
    report.verdict = verdict_from_name(j.at("verdict").get<std::string>());
    auto num = [](const json& v) {
        return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    };
    report.margin = num(j.at("margin"));
    report.sup_q = num(j.at("sup_q"));
    report.inf_q = num(j.at("inf_q"));
    const json& limits = j.at("limits");
    report.approaches_left = limits.at("approaches_left").get<bool>();
    report.approaches_right = limits.at("approaches_right").get<bool>();
    if (!limits.at("left").is_null()) report.limit_left = limits.at("left").get<double>();
    if (!limits.at("right").is_null()) report.limit_right = limits.at("right").get<double>();
    report.threshold = j.at("tolerances").at("threshold").get<double>();
    return report;
}

json intersection_to_json(const loops::IntersectionRecord& rec) {
    json j;
    j["point_first"] = vec_to_json(rec.point_first);
    j["point_second"] = vec_to_json(rec.point_second);
    j["tangent_first"] = vec_to_json(rec.tangent_first);
    j["tangent_second"] = vec_to_json(rec.tangent_second);
    j["g_first"] = rec.g_first;
    j["g_second"] = rec.g_second;
    j["positively_proportional"] = rec.positively_proportional;
    j["sector"] = rec.sector;
    return j;
}

loops::IntersectionRecord intersection_from_json(const json& j) {
    loops::IntersectionRecord rec;
    rec.point_first = vec_from_json(j.at("point_first"), "point_first");
    rec.point_second = vec_from_json(j.at("point_second"), "point_second");
    rec.tangent_first = vec_from_json(j.at("tangent_first"), "tangent_first");
    rec.tangent_second = vec_from_json(j.at("tangent_second"), "tangent_second");
    rec.g_first = j.at("g_first").get<double>();
    rec.g_second = j.at("g_second").get<double>();
    rec.positively_proportional = j.at("positively_proportional").get<bool>();
    rec.sector = j.at("sector").get<std::string>();
    return rec;
}

}  // namespace

geom::MetricSpec manifold_from_json(const std::string& text) {
    const json j = parse_json(text, "manifold spec");
    if (!j.is_object()) throw InvalidArgument("manifold spec must be a JSON object");
    std::vector<std::string> coords;
    for (const json& c : j.at("coordinates")) coords.push_back(c.get<std::string>());
    if (j.contains("dimension") &&
        j.at("dimension").get<int>() != static_cast<int>(coords.size()))
        throw InvalidArgument("dimension does not match the coordinate list");
    const bool normal_form = j.value("normal_form", false);

    const json& metric = j.at("metric");
    if (!metric.is_object()) throw InvalidArgument("metric must be a JSON object");
    const int n = static_cast<int>(coords.size());
    std::map<std::pair<int, int>, std::string> components;
    for (auto it = metric.begin(); it != metric.end(); ++it) {
        const std::string& key = it.key();
        int matches = 0;
        std::pair<int, int> found;
        for (int i = 0; i < n; ++i)
            for (int jj = i; jj < n; ++jj)
                if (key == "g_" + coords[i] + coords[jj]) {
                    ++matches;
                    found = {i, jj};
                }
        if (matches == 0)
            throw InvalidArgument("metric key '" + key + "' names no coordinate pair");
        if (matches > 1)
            throw InvalidArgument("metric key '" + key + "' is ambiguous");
        components[found] = it.value().get<std::string>();
    }
    return geom::MetricSpec::create(std::move(coords), components, normal_form);
}

geom::MetricSpec load_manifold(const std::string& path) {
    return manifold_from_json(read_text(path));
}

std::string manifold_to_json(const geom::MetricSpec& spec) {
    json j;
    const auto& coords = spec.coordinates();
    j["dimension"] = spec.dimension();
    j["coordinates"] = coords;
    j["normal_form"] = spec.normal_form();
    json metric;
    for (int i = 0; i < spec.dimension(); ++i)
        for (int k = i; k < spec.dimension(); ++k) {
            const std::string src = spec.component_source(i, k);
            if (i != k && src == "0") continue;
            metric["g_" + coords[i] + coords[k]] = src;
        }
    j["metric"] = std::move(metric);
    return j.dump(2) + "\n";
}

curves::CurvePath curve_from_json(const std::string& text, const geom::MetricSpec& spec) {
    const json j = parse_json(text, "curve spec");
    if (!j.is_object()) throw InvalidArgument("curve spec must be a JSON object");

    if (j.contains("samples")) {
        std::vector<curves::CurveSample> samples = samples_from_json(j.at("samples"));
        for (curves::CurveSample& s : samples) {
            if (s.point.size() != spec.dimension())
                throw InvalidArgument("sample dimension does not match the manifold");
            const geom::MetricValue mv = geom::metric_at(spec, s.point);
            s.det_g = mv.det;
            switch (mv.signature) {
                case geom::Signature::lorentzian: s.tag = curves::SampleTag::lorentzian; break;
                case geom::Signature::riemannian: s.tag = curves::SampleTag::riemannian; break;
                case geom::Signature::degenerate: s.tag = curves::SampleTag::on_h; break;
            }
        }
        return curves::CurvePath::sampled(std::move(samples));
    }

    curves::SymbolicCurve curve;
    curve.parameter = j.value("parameter", std::string("u"));
    const json& interval = j.at("interval");
    if (!interval.is_array() || interval.size() != 2)
        throw InvalidArgument("curve interval must be [a, b]");
    curve.a = interval[0].get<double>();
    curve.b = interval[1].get<double>();
    const json& comps = j.at("components");
    for (const std::string& name : spec.coordinates()) {
        if (!comps.contains(name))
            throw InvalidArgument("curve components are missing coordinate '" + name + "'");
        curve.components.push_back(
            dsl::Expression::parse(comps.at(name).get<std::string>(), {curve.parameter}));
    }
    return curves::CurvePath::symbolic(std::move(curve));
}

curves::CurvePath load_curve(const std::string& path, const geom::MetricSpec& spec) {
    return curve_from_json(read_text(path), spec);
}

std::string classification_to_json(const gap::ClassificationOutcome& outcome) {
    json j = report_to_json_obj(outcome.report);
    j["u0"] = outcome.u0;
    j["richardson_error"] = finite_or_null(outcome.gap.richardson_error);
    json q_samples = json::array();
    for (const gap::GapSample& s : outcome.gap.samples)
        if (std::isfinite(s.q)) q_samples.push_back(json::array({s.mu, s.q}));
    j["q_samples"] = std::move(q_samples);
    return j.dump(2) + "\n";
}

std::string certificate_to_json(const loops::LoopCertificate& cert,
                                const loops::ValidationReport* validation) {
    json j;
    j["kind"] = cert.kind;
    j["base_point"] = vec_to_json(cert.base_point);
    j["apex"] = vec_to_json(cert.apex);
    json box;
    box["t0"] = cert.box.t0;
    box["xi0"] = cert.box.xi0;
    box["center"] = vec_to_json(cert.box.center);
    j["box"] = std::move(box);
    j["cone_fraction"] = cert.cone_fraction;
    j["g0"] = cert.G0;
    j["closure_residual"] = cert.closure_residual;
    j["loop_class"] = cert.loop_class;

    json segs = json::array();
    for (const loops::LoopSegment& seg : cert.segments) {
        json s;
        s["role"] = loops::segment_role_name(seg.role);
        s["classification"] =
            seg.classification ? report_to_json_obj(*seg.classification) : json(nullptr);
        s["samples"] = samples_to_json(seg.path.samples());
        segs.push_back(std::move(s));
    }
    j["segments"] = std::move(segs);

    json crossings = json::array();
    for (const loops::CrossingRecord& c : cert.crossings) {
        json cj;
        cj["point"] = vec_to_json(c.point);
        cj["det_g"] = c.det_g;
        cj["radical"] = geom::radical_verdict_name(c.radical);
        crossings.push_back(std::move(cj));
    }
    j["crossings"] = std::move(crossings);

    j["endpoint_intersection"] = intersection_to_json(cert.endpoint_intersection);
    j["base_intersection"] = cert.base_intersection
                                 ? intersection_to_json(*cert.base_intersection)
                                 : json(nullptr);
    if (validation) {
        const json v = parse_json(validation_to_json(*validation), "validation report");
        j["validation"] = v;
    }
    return j.dump(2) + "\n";
}

loops::LoopCertificate certificate_from_json(const std::string& text) {
    const json j = parse_json(text, "loop certificate");
    loops::LoopCertificate cert;
    cert.kind = j.at("kind").get<std::string>();
    cert.base_point = vec_from_json(j.at("base_point"), "base_point");
    cert.apex = vec_from_json(j.at("apex"), "apex");
    const json& box = j.at("box");
    cert.box.t0 = box.at("t0").get<double>();
    cert.box.xi0 = box.at("xi0").get<double>();
    cert.box.center = vec_from_json(box.at("center"), "box center");
    cert.cone_fraction = j.at("cone_fraction").get<double>();
    cert.G0 = j.at("g0").get<double>();
    cert.closure_residual = j.at("closure_residual").get<double>();
    cert.loop_class = j.at("loop_class").get<std::string>();

    for (const json& s : j.at("segments")) {
        loops::LoopSegment seg;
        seg.role = role_from_name(s.at("role").get<std::string>());
        if (!s.at("classification").is_null())
            seg.classification = report_from_json_obj(s.at("classification"));
        seg.path = curves::CurvePath::sampled(samples_from_json(s.at("samples")));
        cert.segments.push_back(std::move(seg));
    }
    for (const json& c : j.at("crossings")) {
        loops::CrossingRecord rec;
        rec.point = vec_from_json(c.at("point"), "crossing point");
        rec.det_g = c.at("det_g").get<double>();
        rec.radical = radical_from_name(c.at("radical").get<std::string>());
        cert.crossings.push_back(std::move(rec));
    }
    cert.endpoint_intersection = intersection_from_json(j.at("endpoint_intersection"));
    if (!j.at("base_intersection").is_null())
        cert.base_intersection = intersection_from_json(j.at("base_intersection"));
    return cert;
}

std::string validation_to_json(const loops::ValidationReport& report) {
    json j;
    j["all_pass"] = report.all_pass;
    json items = json::array();
    for (const loops::ValidationItem& item : report.items) {
        json i;
        i["name"] = item.name;
        i["pass"] = item.pass;
        i["detail"] = item.detail;
        items.push_back(std::move(i));
    }
    j["items"] = std::move(items);
    return j.dump(2) + "\n";
}

std::string curve_samples_csv(const std::vector<std::string>& coordinates,
                              const std::vector<curves::CurveSample>& samples) {
    std::ostringstream os;
    os << "u";
    for (const std::string& c : coordinates) os << "," << c;
    for (const std::string& c : coordinates) os << ",d" << c << "_du";
    os << ",segment_tag,det_g\n";
    for (const curves::CurveSample& s : samples) {
        os << fmt(s.u);
        for (int i = 0; i < s.point.size(); ++i) os << "," << fmt(s.point(i));
        for (int i = 0; i < s.tangent.size(); ++i) os << "," << fmt(s.tangent(i));
        os << "," << curves::sample_tag_name(s.tag) << "," << fmt(s.det_g) << "\n";
    }
    return os.str();
}

std::string gap_table_csv(const gap::GapParametrization& gap) {
    std::ostringstream os;
    os << "u,mu,dmu_du,q\n";
    for (const gap::GapSample& s : gap.samples)
        os << fmt(s.u) << "," << fmt(s.mu) << "," << fmt(s.w) << "," << fmt(s.q) << "\n";
    return os.str();
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad()) throw IoError("failed while reading '" + path + "'");
    return os.str();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("failed while writing '" + path + "'");
}

}  // namespace sigloop::io
