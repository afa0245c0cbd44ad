#ifndef SIGLOOP_CURVES_CURVE_HPP
#define SIGLOOP_CURVES_CURVE_HPP

#include <string>
#include <vector>

#include "sigloop/geometry/metric.hpp"

namespace sigloop::curves {

enum class SampleTag { lorentzian, riemannian, on_h };

const char* sample_tag_name(SampleTag t);

struct CurveSample {
    double u = 0.0;
    geom::Vec point;
    geom::Vec tangent;
    SampleTag tag = SampleTag::on_h;
    double det_g = 0.0;
};

// Curve with one expression per coordinate over a single parameter symbol.
struct SymbolicCurve {
    std::string parameter = "u";
    double a = 0.0;
    double b = 1.0;
    std::vector<dsl::Expression> components;

    void eval(double u, geom::Vec* point, geom::Vec* tangent) const;
};

// A parametrized chart curve, either symbolic or given by samples with
// tangents.  Sampled curves are evaluated by cubic Hermite interpolation on
// the stored tangents.
class CurvePath {
public:
    static CurvePath symbolic(SymbolicCurve curve);
    static CurvePath sampled(std::vector<CurveSample> samples);

    bool is_symbolic() const { return symbolic_.components.size() > 0; }
    double a() const;
    double b() const;
    int dimension() const;

    void eval(double u, geom::Vec* point, geom::Vec* tangent) const;

    const std::vector<CurveSample>& samples() const { return samples_; }
    const SymbolicCurve& symbolic_curve() const { return symbolic_; }

    // Samples traversed in the opposite direction (tangents negated,
    // parameter remapped to keep it increasing).
    CurvePath reversed() const;

private:
    SymbolicCurve symbolic_;
    std::vector<CurveSample> samples_;
};

std::vector<double> uniform_grid(double a, double b, int count);

// Evaluates the curve on the grid and attaches signature tags and det g.
std::vector<CurveSample> sample_curve(const geom::MetricSpec& spec, const CurvePath& curve,
                                      const std::vector<double>& grid);

// Uniformly sampled path with tags (the sample_count >= 2 grid includes both
// interval ends).
CurvePath sample_symbolic_curve(const geom::MetricSpec& spec, const SymbolicCurve& curve,
                                int sample_count);

}  // namespace sigloop::curves

#endif
