#ifndef SIGLOOP_TOLERANCES_HPP
#define SIGLOOP_TOLERANCES_HPP

namespace sigloop::tol {

// Signature classification tolerance on metric eigenvalues.
inline constexpr double kSigma = 1e-10;

// Metric inversion is refused when |det g| falls at or below this.
inline constexpr double kInversion = 1e-12;

// Kernel condition |g(q) w| <= kKernel * |w| for radical extraction, and the
// on-hypersurface requirement |det g(q)| < kKernel.
inline constexpr double kKernel = 1e-8;

// Relative transversality margin for the radical indicator.
inline constexpr double kTransversality = 1e-8;

// Integrators: relative/absolute step tolerances and the step-size floor.
inline constexpr double kOdeRel = 1e-10;
inline constexpr double kOdeAbs = 1e-12;
inline constexpr double kStepFloor = 1e-12;

// Parallel transport halts (partial result) when |det g| drops below this.
inline constexpr double kDetFloor = 1e-9;

// A transported frame must keep |det[E_1 ... E_n]| above this.
inline constexpr double kFrameDet = 1e-10;

// Null-fan tangent residual |g(c', c')| bound at retained samples.
inline constexpr double kNullResidual = 1e-8;

// Loop closure residual bound.
inline constexpr double kClosure = 1e-8;

// Default classification threshold epsilon.
inline constexpr double kClassifyThreshold = 1e-6;

// Cone containment slack: comparison-null vectors X must have
// g(X, X) >= -kConeContain.
inline constexpr double kConeContain = 1e-10;

// Value tolerance for the spatial-form minimization.
inline constexpr double kMinimizeValue = 1e-9;

// Fan integration switches to the time coordinate as integration variable
// when t drops below this fraction of the start height.
inline constexpr double kFanSwitchFraction = 0.01;

// Default interior cone fraction for timelike fan curves.
inline constexpr double kConeFraction = 0.9;

}  // namespace sigloop::tol

#endif
