#pragma once

// Classical side: generating functions W of the moving frame, their
// Hamilton-Jacobi residuals, the quantum action S = W + i hbar int F dt,
// Legendre elimination, classical trajectories and the oscillator's
// action-angle map.
//
// Sign conventions: for W(q, Q, t), p = dW/dq and P = -dW/dQ; for W(q, P, t),
// p = dW/dq and Q = dW/dP.

#include <random>
#include <span>
#include <vector>

#include "qmframe/check.hpp"
#include "qmframe/hilbert.hpp"

namespace qmframe::hj {

/// Second argument of W: the new position Q or the new momentum P.
enum class GenRep { qQ, qP };

std::string_view to_string(GenRep rep);

struct Partials {
  double value;
  double dq;
  double dx;  // d/dQ or d/dP
  double dt;
  double dqq;
  double dxx;
  double dqx;
};

/// Evaluation point (q, x, t) with x = Q or P.
struct Sample {
  double q;
  double x;
  double t;
};

class GeneratingFunction {
 public:
  GeneratingFunction(GenRep rep, const SystemParams& params);

  System system() const noexcept { return params_.system; }
  GenRep rep() const noexcept { return rep_; }
  const SystemParams& params() const noexcept { return params_; }

  /// False at t = 0 (Free qQ), sin wt = 0 (Harmonic qQ), cos wt = 0 (Harmonic qP),
  /// with a 1e-6 guard.
  bool in_domain(double t) const;

  /// W and its analytic partials. Throws SingularTime outside the domain.
  Partials evaluate(double q, double x, double t) const;
  double value(double q, double x, double t) const { return evaluate(q, x, t).value; }

 private:
  GenRep rep_;
  SystemParams params_;
};

/// Throws UnsupportedCombination when system disagrees with params.system.
GeneratingFunction generating(System system, GenRep rep, const SystemParams& params);

/// (1/2m) (dW/dq)^2 + V(q) + dW/dt.
double hj_residual(const GeneratingFunction& w, double q, double x, double t);
CheckResult hj_residual_check(const GeneratingFunction& w, std::span<const Sample> samples, double tolerance = 1e-12);

/// Uniform samples with q, x in [-3, 3] and t in a range kept clear of the
/// domain's singular times: Free qQ t in [0.2, 2], Free qP t in [-2, 2],
/// Harmonic qQ wt in [0.3, pi - 0.3], Harmonic qP wt in [0.1, 1.25].
std::vector<Sample> random_samples(const GeneratingFunction& w, std::size_t count, std::mt19937_64& rng);

/// Samples for finite-difference PDE residuals, where the phase must vary
/// slowly on the scale of the step. With l = sqrt(hbar / (m w)) (w = 1 for
/// Free): q in [-l/2, l/2], Q in [-l/2, l/2] or P in [-hbar/2l, hbar/2l],
/// and wt in [0.5, 1].
std::vector<Sample> pde_samples(const GeneratingFunction& w, std::size_t count, std::mt19937_64& rng);

/// F(t) = (1/2m) d^2W/dq^2. W is quadratic in q for every supported
/// generating function, so F is independent of q. Throws NonQuadratic
/// if that fails.
double f_function(const GeneratingFunction& w, double t);

/// S = W + i hbar I(t) with I' = F and
///   Free qQ: I = ln sqrt(t)         Harmonic qQ: I = ln sqrt(sin wt)
///   Free qP: I = 0                  Harmonic qP: I = ln sqrt(cos wt)
/// The logarithm of a negative cosine takes the principal branch.
class QuantumAction {
 public:
  explicit QuantumAction(GeneratingFunction base);

  const GeneratingFunction& base() const noexcept { return base_; }
  double f(double t) const { return f_function(base_, t); }
  cplx f_integral(double t) const;
  cplx value(double q, double x, double t) const;

 private:
  GeneratingFunction base_;
};

QuantumAction quantum_action(const GeneratingFunction& w);

/// exp(i S / hbar).
cplx semiclassical_wavefunction(const QuantumAction& action, double q, double x, double t);

/// |i hbar psi_t - H psi| / |psi| with three-point central differences.
double se_residual(const QuantumAction& action, const Sample& at, double h = 1e-3);
CheckResult se_residual_check(const QuantumAction& action, std::span<const Sample> samples, double h = 1e-3,
                              double tolerance = 1e-5);

/// psi / kernel for the matching kernel representation.
cplx kernel_ratio(const QuantumAction& action, double q, double x, double t);
/// Largest relative deviation of kernel_ratio from its value at the first
/// sample. The ratio itself is recorded in the metadata.
CheckResult kernel_proportionality_check(const QuantumAction& action, std::span<const Sample> samples,
                                         double tolerance = 1e-8);

/// Eliminates Q from P = -dW(q,Q,t)/dQ by Newton iteration and compares
/// W(q,Q*,t) + Q* P with W(q,P,t). Samples are (q, P, t). Throws
/// DegenerateHessian where d^2W/dQ^2 vanishes.
CheckResult legendre_transform_check(const SystemParams& params, std::span<const Sample> samples,
                                     double tolerance = 1e-10);

struct CanonicalImage {
  double Q;
  double P;
};

/// (Q, P) obtained from (q, p) through the generating function alone.
CanonicalImage canonical_image(const GeneratingFunction& w, double q, double p, double t);
/// Closed form: Q = q - t p/m, P = p (Free); the rotated pair (Harmonic).
CanonicalImage frame_coordinates(const SystemParams& params, double q, double p, double t);

/// Samples are (q, p, t). Both generating functions are eliminated and
/// compared with frame_coordinates.
CheckResult canonical_derivative_check(const SystemParams& params, std::span<const Sample> samples,
                                       double tolerance = 1e-10);

struct PhasePoint {
  double q;
  double p;
  double t;
};

PhasePoint classical_trajectory(const SystemParams& params, double q0, double p0, double t);

/// Fixed-step classical RK4 from t = 0 to t_end, recording every `stride`
/// steps plus the end point.
std::vector<PhasePoint> integrate_trajectory(const SystemParams& params, double q0, double p0, double t_end,
                                             double step = 1e-3, int stride = 100);

/// Largest change of frame_coordinates along the trajectory.
CheckResult frame_constancy_check(const SystemParams& params, std::span<const PhasePoint> trajectory,
                                  double tolerance = 1e-8);
/// Largest relative change of the classical energy along the trajectory.
CheckResult energy_conservation_check(const SystemParams& params, std::span<const PhasePoint> trajectory,
                                      double tolerance = 1e-10);

/// Q = atan2(m w q, p) / w - t and P = p^2/2m + m w^2 q^2 / 2 (Harmonic only).
CanonicalImage action_angle(const SystemParams& params, double q, double p, double t);

/// {Q, P}_{q,p} by central differences; angle differences are taken modulo
/// the period so the stencil may straddle the arctangent cut.
double action_angle_bracket(const SystemParams& params, double q, double p, double h = 1e-5);

/// |{Q, P} - 1| over points (q, p); points with |p| < p_min are skipped and
/// counted in the metadata.
CheckResult action_angle_check(const SystemParams& params, std::span<const PhasePoint> points, double h = 1e-5,
                               double tolerance = 1e-6, double p_min = 0.1);

/// Constancy of the action-angle pair along a trajectory, with the angle
/// unwrapped continuously from sample to sample.
CheckResult action_angle_orbit_check(const SystemParams& params, std::span<const PhasePoint> trajectory,
                                     double tolerance = 1e-8);

}  // namespace qmframe::hj
