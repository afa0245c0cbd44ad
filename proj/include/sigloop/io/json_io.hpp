#ifndef SIGLOOP_IO_JSON_IO_HPP
#define SIGLOOP_IO_JSON_IO_HPP

#include <string>
#include <vector>

#include "sigloop/curves/curve.hpp"
#include "sigloop/gap/gap.hpp"
#include "sigloop/geometry/metric.hpp"
#include "sigloop/loops/loops.hpp"

namespace sigloop::io {

// --- manifold specs ----------------------------------------------------------
// { "dimension": n, "coordinates": [...],
//   "metric": { "g_tt": "...", "g_tx": "...", ... }, "normal_form": bool }
// Component keys concatenate the two coordinate names; omitted off-diagonal
// components default to "0".
geom::MetricSpec manifold_from_json(const std::string& text);
geom::MetricSpec load_manifold(const std::string& path);
std::string manifold_to_json(const geom::MetricSpec& spec);

// --- curve specs --------------------------------------------------------------
// Symbolic: { "parameter": "u", "interval": [a, b],
//             "components": { "t": "...", "x": "..." } }
// Sampled:  { "samples": [ { "u": ..., "point": [...], "tangent": [...] } ] }
// Sampled curves get tags and det g recomputed against the metric at load.
curves::CurvePath curve_from_json(const std::string& text, const geom::MetricSpec& spec);
curves::CurvePath load_curve(const std::string& path, const geom::MetricSpec& spec);

// --- reports ------------------------------------------------------------------
std::string classification_to_json(const gap::ClassificationOutcome& outcome);
std::string certificate_to_json(const loops::LoopCertificate& cert,
                                const loops::ValidationReport* validation);
loops::LoopCertificate certificate_from_json(const std::string& text);
std::string validation_to_json(const loops::ValidationReport& report);

// --- CSV ----------------------------------------------------------------------
// All numbers use 17-significant-digit scientific notation.
std::string curve_samples_csv(const std::vector<std::string>& coordinates,
                              const std::vector<curves::CurveSample>& samples);
std::string gap_table_csv(const gap::GapParametrization& gap);

// --- files ----------------------------------------------------------------------
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& content);

}  // namespace sigloop::io

#endif
