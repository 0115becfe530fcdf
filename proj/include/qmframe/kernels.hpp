#pragma once

// Closed-form transformation functions <q|Q;t> (Feynman kernels) and their
// momentum-representation partners, moving-picture representations of
// momentum, number and coherent states, and the numerical oracles each
// closed form is checked against.

#include <span>
#include <utility>
#include <vector>

#include "qmframe/check.hpp"
#include "qmframe/hilbert.hpp"

namespace qmframe::kernels {

enum class Representation { PositionQ, MomentumP };

struct KernelSpec {
  Representation representation = Representation::PositionQ;
  SystemParams params;

  System system() const noexcept { return params.system; }
};

/// Whether the kernel is finite and on the principal branch at time t:
///   Free/PositionQ: t > 0            Harmonic/PositionQ: 0 < wt < pi
///   Free/MomentumP: any t            Harmonic/MomentumP: -pi/2 < wt < pi, cos wt != 0
/// Points within 1e-6 (in sin wt or cos wt) of a singularity count as outside.
bool in_window(const KernelSpec& spec, double t);

/// Closed-form kernel value. The prefactor uses the principal square root,
/// so sqrt(1/i) = exp(-i pi/4). Throws SingularTime outside in_window.
cplx kernel(const KernelSpec& spec, double q, double q_or_p, double t);

/// Kernel sampled on grid x grid, stored kernel-weighted so that applying
/// it performs the trapezoid quadrature  sum_j K(q_i, Q_j) phi(Q_j) dq.
DenseOperator kernel_matrix(const KernelSpec& spec, const Grid& grid, double t);

/// Physicists' Hermite polynomial via H_{n+1} = 2 xi H_n - 2 n H_{n-1}.
double hermite(int n, double xi);

/// Normalized oscillator eigenfunction <q|n>, evaluated with the stable
/// normalized three-term recurrence.
double ho_eigenfunction(const SystemParams& params, double q, int n);

/// <Q;t|p> = (2 pi hbar)^{-1/2} exp(i Q p / hbar + i p^2 t / (2 m hbar)).
cplx moving_momentum_state(const SystemParams& params, double q_value, double p, double t);

/// <Q;t|n> = (m w / pi hbar)^{1/4} (2^n n!)^{-1/2} exp(-m w Q^2 / 2 hbar + i (n + 1/2) w t) H_n(sqrt(m w / hbar) Q).
cplx moving_number_state(const SystemParams& params, double q_value, int n, double t);

/// <Q;t|z> for the coherent state a|z> = z|z>.
cplx moving_coherent_state(const SystemParams& params, double q_value, cplx z, double t);

/// Trapezoid rule on a uniform lattice with a smooth erfc taper
///   w(x) = erfc((|x - center| - flat_half_width) / taper_width) / 2,
/// which regulates integrals of pure phases without touching the stationary
/// region. taper_width == 0 gives a plain truncated trapezoid rule.
class TaperedRule {
 public:
  TaperedRule(double center, double flat_half_width, double taper_width, double step);

  /// Rule for an integrand whose phase is a x^2 + b x + const: centered on
  /// the stationary point, wide enough that the taper sits where the phase
  /// oscillates fast, and fine enough to resolve that oscillation.
  static TaperedRule for_chirp(double a, double b);

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }

  template <class F>
  cplx integrate(F&& f) const {
    cplx sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(nodes_[i]);
    return sum;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

struct PointPair {
  double q;
  double other;  // Q or P
};

struct SpaceTimePoint {
  double q;
  double other;  // Q or P
  double t;
};

/// ||T(t) phi - int K(., Q; t) phi(Q) dQ||_2 / ||phi||_2, the dense
/// evolution against grid quadrature of the closed-form kernel.
CheckResult kernel_vs_evolution_check(const KernelSpec& spec, const Propagator& propagator, double t,
                                      const WaveFunction& packet, double tolerance = 1e-6);
CheckResult kernel_vs_evolution_check(const KernelSpec& spec, const Grid& grid, double t, const WaveFunction& packet,
                                      double tolerance = 1e-6);

/// sup over pairs of |K(q,Q;t1+t2) - int K(q,x;t1) K(x,Q;t2) dx|. t2 == 0
/// is the identity composition and reports zero.
CheckResult kernel_composition_check(const KernelSpec& spec, double t1, double t2, std::span<const PointPair> pairs,
                                     double tolerance = 1e-5);

/// Relative residual |i hbar K_t + hbar^2/(2m) K_qq - V K| / |K| by three-point central
/// differences (error O(h^2)).
double kernel_schrodinger_residual(const KernelSpec& spec, const SpaceTimePoint& point, double h = 1e-3);
CheckResult kernel_schrodinger_check(const KernelSpec& spec, std::span<const SpaceTimePoint> points, double h = 1e-3,
                                     double tolerance = 1e-5);

/// Closed-form <Q;t|p> against  int dq conj(<q|Q;t>) <q|p>  (Free only).
CheckResult moving_momentum_check(const SystemParams& params, double t, std::span<const PointPair> pairs,
                                  double tolerance = 1e-6);

/// Closed-form <Q;t|n> against  int dq conj(<q|Q;t>) <q|n>  for n <= n_max
/// at the given Q values (max absolute error).
CheckResult moving_number_check(const SystemParams& params, double t, int n_max, std::span<const double> q_values,
                                double tolerance = 1e-8);

/// max |int dQ conj(<Q;t|m>) <Q;t|n> - delta_mn| for m, n <= n_max.
CheckResult number_orthonormality_check(const SystemParams& params, double t, int n_max, double tolerance = 1e-8);

/// Number-basis expansion sum_n <Q;t|n> <n|z>, truncated once the coefficient
/// magnitude falls below 1e-14 past the peak. Returns the sum and the cutoff.
std::pair<cplx, int> coherent_number_sum(const SystemParams& params, double q_value, cplx z, double t);

/// Closed-form <Q;t|z> against coherent_number_sum.
CheckResult moving_coherent_check(const SystemParams& params, double t, std::span<const cplx> zs,
                                  std::span<const double> q_values, double tolerance = 1e-6);

/// Closed-form <q|P;t> against  int dQ <q|Q;t> (2 pi hbar)^{-1/2} exp(i P Q / hbar).
CheckResult fourier_duality_check(const SystemParams& params, double t, std::span<const PointPair> pairs,
                                  double tolerance = 1e-6);

/// Inner products of Gaussian packets are preserved when pushed through the
/// kernel by quadrature.
CheckResult kernel_unitarity_check(const KernelSpec& spec, double t, double tolerance = 1e-6);

}  // namespace qmframe::kernels
