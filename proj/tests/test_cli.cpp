#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sigloop/io/cli.hpp"
#include "sigloop/io/json_io.hpp"

namespace fs = std::filesystem;
using sigloop::io::read_text;

namespace {

int run(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
    std::vector<const char*> argv;
    argv.push_back("sigloop");
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc =
        sigloop::io::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return rc;
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "sigloop_test_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string source_path(const std::string& rel) {
    return std::string(SIGLOOP_SOURCE_DIR) + "/" + rel;
}

}  // namespace

TEST_CASE("help and argument errors") {
    std::string out;
    CHECK(run({"--help"}, &out) == 0);
    CHECK(out.find("classify") != std::string::npos);
    CHECK(run({}) == 2);                       // a subcommand is required
    CHECK(run({"classify"}) == 2);             // --curve is required
    CHECK(run({"no-such-command"}) == 2);
    CHECK(run({"classify", "--curve", "toy-alpha", "--bogus"}) == 2);
}

TEST_CASE("classification of presets and files agree byte for byte") {
    std::string from_preset, from_files;
    CHECK(run({"classify", "--curve", "toy-alpha"}, &from_preset) == 0);
    CHECK(run({"classify", "--manifold", source_path("data/presets/toy.json"), "--curve",
               source_path("data/presets/toy-alpha.json")},
              &from_files) == 0);
    CHECK(from_preset == from_files);
    CHECK(from_preset.find("\"verdict\": \"pseudo-timelike\"") != std::string::npos);
}

TEST_CASE("input failures exit with code 2 and a structured error") {
    std::string out, err;
    CHECK(run({"classify", "--curve", "no-such-curve"}, &out, &err) == 2);
    CHECK(out.find("\"error\"") != std::string::npos);
    CHECK(out.find("\"kind\": \"input\"") != std::string::npos);
    CHECK(!err.empty());

    const fs::path dir = scratch_dir();
    const fs::path bad = dir / "broken.json";
    sigloop::io::write_text(bad.string(), "{ not json");
    CHECK(run({"classify", "--manifold", bad.string(), "--curve", "toy-alpha"}) == 2);

    // A curve preset without --manifold picks its home manifold; a file curve
    // cannot.
    CHECK(run({"classify", "--curve", source_path("data/presets/toy-alpha.json")}) == 2);
}

TEST_CASE("numerical failures exit with code 3") {
    const fs::path dir = scratch_dir();
    const fs::path leaves = dir / "leaves-chart.json";
    sigloop::io::write_text(leaves.string(), R"json({
  "dimension": 2,
  "coordinates": ["t", "x"],
  "metric": { "g_tt": "-1", "g_xx": "sqrt(0 - (t + 0.5))" },
  "normal_form": false
})json");
    std::string out;
    CHECK(run({"classify", "--manifold", leaves.string(), "--curve", "toy-alpha"}, &out) == 3);
    CHECK(out.find("\"kind\": \"numerical\"") != std::string::npos);
}

TEST_CASE("validation failures exit with code 4") {
    std::string out;
    CHECK(run({"check", "--inject-bad-g0"}, &out) == 4);
    CHECK(out.find("\"all_pass\": false") != std::string::npos);
    CHECK(run({"cones", "--manifold", "toy-normal", "--xi0", "0.8", "--samples", "500",
               "--inject-bad-g0"}) == 4);
}

TEST_CASE("invariant suites pass with the default seed") {
    std::string out;
    CHECK(run({"check"}, &out) == 0);
    CHECK(out.find("\"all_pass\": true") != std::string::npos);
    CHECK(out.find("expression-gradients") != std::string::npos);
    CHECK(out.find("cone-containment") != std::string::npos);

    // A different seed still passes but the run is seed-deterministic.
    std::string again;
    CHECK(run({"check"}, &again) == 0);
    CHECK(out == again);
}

TEST_CASE("gap and transport emit dense tables") {
    std::string gap_csv;
    CHECK(run({"gap", "--curve", "toy-alpha"}, &gap_csv) == 0);
    CHECK(gap_csv.rfind("u,mu,dmu_du,q\n", 0) == 0);
    CHECK(gap_csv.find("nan") == std::string::npos);

    std::string frame_csv;
    CHECK(run({"transport", "--curve", "toy-alpha"}, &frame_csv) == 0);
    CHECK(frame_csv.rfind("u,e0_t,e0_x,e1_t,e1_x,frame_det,det_g\n", 0) == 0);
}

TEST_CASE("cone summaries are seeded and reproducible") {
    std::string a, b, c;
    CHECK(run({"cones", "--manifold", "toy-normal", "--xi0", "0.8", "--samples", "400",
               "--seed", "11"},
              &a) == 0);
    CHECK(run({"cones", "--manifold", "toy-normal", "--xi0", "0.8", "--samples", "400",
               "--seed", "11"},
              &b) == 0);
    CHECK(run({"cones", "--manifold", "toy-normal", "--xi0", "0.8", "--samples", "400",
               "--seed", "12"},
              &c) == 0);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.find("\"g0\": 1.0") != std::string::npos);
}

TEST_CASE("loop subcommands write validated certificates") {
    const fs::path dir = scratch_dir();
    const fs::path cert = dir / "cert.json";
    std::string out;
    CHECK(run({"loop-local", "--manifold", "toy-normal", "--point", "0,0", "--t0", "1",
               "--xi0", "1", "--out", cert.string()},
              &out) == 0);
    CHECK(out.find("\"all_pass\": true") != std::string::npos);
    REQUIRE(fs::exists(cert));

    // Revalidation from the file agrees.
    std::string revalidated;
    CHECK(run({"validate", "--manifold", "toy-normal", "--cert", cert.string()},
              &revalidated) == 0);
    CHECK(revalidated.find("\"all_pass\": true") != std::string::npos);

    // Builds are reproducible byte for byte.
    const fs::path cert2 = dir / "cert2.json";
    CHECK(run({"loop-local", "--manifold", "toy-normal", "--point", "0,0", "--t0", "1",
               "--xi0", "1", "--out", cert2.string()}) == 0);
    CHECK(read_text(cert.string()) == read_text(cert2.string()));

    // A textual corruption of the certificate is caught and exits 4.
    std::string text = read_text(cert.string());
    const std::string needle = "\"loop_class\": \"loop\"";
    REQUIRE(text.find(needle) != std::string::npos);
    text.replace(text.find(needle), needle.size(), "\"loop_class\": \"closed-pseudo-timelike\"");
    const fs::path tampered = dir / "tampered.json";
    sigloop::io::write_text(tampered.string(), text);
    std::string verdict;
    CHECK(run({"validate", "--manifold", "toy-normal", "--cert", tampered.string()},
              &verdict) == 4);
    CHECK(verdict.find("\"all_pass\": false") != std::string::npos);

    // Global loops run through the same pipeline.
    CHECK(run({"loop-global", "--manifold", "toy-normal", "--point", "-0.5,0", "--t0", "1",
               "--xi0", "1"},
              &out) == 0);
    CHECK(out.find("\"all_pass\": true") != std::string::npos);

    // Wrong dimension for --point.
    CHECK(run({"loop-local", "--manifold", "toy-normal", "--point", "0,0,0"}) == 2);
}

TEST_CASE("worked-example artifacts regenerate byte-identically") {
    const fs::path dir = scratch_dir();
    std::string out;
    CHECK(run({"examples", "--out", dir.string()}, &out) == 0);
    const std::vector<std::string> names{
        "dray-transform.csv",      "gamma-divergence.csv",      "alpha-gap.csv",
        "alpha-samples.csv",       "alpha-classification.json", "gamma-gap.csv",
        "gamma-samples.csv",       "gamma-classification.json",
    };
    for (const std::string& name : names) {
        CAPTURE(name);
        REQUIRE(fs::exists(dir / name));
        CHECK(read_text((dir / name).string()) == read_text(source_path("data/golden/" + name)));
    }

    // Single-artifact regeneration touches only the requested file.
    const fs::path solo = scratch_dir();
    CHECK(run({"examples", "--name", "dray-transform", "--out", solo.string()}) == 0);
    CHECK(fs::exists(solo / "dray-transform.csv"));
    CHECK_FALSE(fs::exists(solo / "alpha-gap.csv"));
    CHECK(run({"examples", "--name", "unknown", "--out", solo.string()}) == 2);
}
