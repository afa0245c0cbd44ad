#ifndef SIGLOOP_IO_PRESETS_HPP
#define SIGLOOP_IO_PRESETS_HPP

#include <string>
#include <vector>

#include "sigloop/curves/curve.hpp"
#include "sigloop/geometry/metric.hpp"

namespace sigloop::io {

// Built-in manifolds and curves; CLI arguments that name one of these are
// resolved without touching the filesystem.
const std::vector<std::string>& manifold_preset_names();
const std::vector<std::string>& curve_preset_names();

bool is_manifold_preset(const std::string& name);
bool is_curve_preset(const std::string& name);

geom::MetricSpec manifold_preset(const std::string& name);
curves::SymbolicCurve curve_preset(const std::string& name);

// The manifold a preset curve lives on.
std::string curve_preset_manifold(const std::string& name);

}  // namespace sigloop::io

#endif
