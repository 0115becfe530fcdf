#pragma once

// Moving frame: T(t) = exp(-iHt/hbar), the transformed operators
// Q(t) = T q T^dagger and P(t) = T p T^dagger, the moving base |Q;t> = T|Q>,
// and the checks that the transformed Hamiltonian vanishes and that states
// seen from the moving frame do not evolve.

#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "qmframe/check.hpp"
#include "qmframe/hilbert.hpp"

namespace qmframe::evolution {

struct MovingFrame {
  SystemParams params;
  Grid grid;
  double t;
  DenseOperator T;
  DenseOperator Qop;
  DenseOperator Pop;
  std::shared_ptr<const Propagator> propagator;
};

/// Symmetric grid whose position and wavenumber ranges enclose the same
/// phase-space disc in oscillator units: half-width a with a^2 = pi n hbar / (2 m w).
/// For the free particle w = 1 in the units of the params.
Grid balanced_grid(const SystemParams& params, Index n);

/// Builds T(t), Qop and Pop. Warns (Harmonic) when |sin wt| < 1e-6, where the
/// position-representation kernels are singular.
MovingFrame make_frame(const SystemParams& params, const Grid& grid, double t);
MovingFrame make_frame(std::shared_ptr<const Propagator> propagator, double t);

/// q cos wt - p sin wt / (m w) (Harmonic) or q - t p / m (Free).
DenseOperator closed_form_position(const SystemParams& params, const Grid& grid, double t);
/// m w q sin wt + p cos wt (Harmonic) or p (Free).
DenseOperator closed_form_momentum(const SystemParams& params, const Grid& grid, double t);

/// Orthonormal columns spanning the states on which the discretized operators
/// obey the continuum identities at time t.
///
/// Harmonic: the lowest eigenvectors of H, at most 60% of the grid and only
/// as many as fit inside the grid's phase-space box with margin. Free: the
/// lowest eigenvectors of a reference oscillator balanced to the grid, with
/// the count reduced so the sheared disc (q - t p/m) still fits.
CMatrix interior_subspace(const Propagator& propagator, double t);

/// Frobenius distance between the numerically transformed operators and
/// their closed forms, both compressed onto interior_subspace. The residual
/// is the larger of the Q and P distances.
CheckResult closed_form_operator_check(const MovingFrame& frame, double tolerance = 1e-6);

/// Five Gaussians (sigma = 1, q0 in {-2..2}, mixed boosts) used as smooth
/// interior test states.
std::vector<WaveFunction> interior_test_packets(const Grid& grid, double hbar);

/// max over states of |<psi|[Qop, Pop]|psi> - i hbar|.
CheckResult commutator_residual(const MovingFrame& frame, std::span<const WaveFunction> states,
                                double tolerance = 1e-6);

enum class DeltaKind { Raw, Smoothed };

/// T(t)|Q> where |Q> is the raw or smoothed delta built by hilbert.
/// The raw delta sits on the nearest grid point, so its eigenvalue is that
/// grid point rather than Q itself.
WaveFunction moving_base_state(const MovingFrame& frame, double q_value, DeltaKind kind = DeltaKind::Raw);

/// max over Q of ||Qop|Q;t> - Q'|Q;t>|| / |||Q;t>|| with Q' the snapped grid point.
CheckResult moving_base_eigen_check(const MovingFrame& frame, std::span<const double> q_values,
                                    double tolerance = 1e-4);

struct AnalyticDerivative {};
struct FiniteDifference {
  double dt = 1e-4;
};
using DerivativeMode = std::variant<AnalyticDerivative, FiniteDifference>;

/// Operator 2-norm of T^dagger H T + i hbar (dT^dagger/dt) T on the interior
/// subspace. Default tolerances: 1e-9 analytic, 1e-3 finite difference.
CheckResult transformed_hamiltonian_residual(const Propagator& propagator, double t, DerivativeMode mode);
CheckResult transformed_hamiltonian_residual(const Propagator& propagator, double t, DerivativeMode mode,
                                             double tolerance);
CheckResult transformed_hamiltonian_residual(const SystemParams& params, const Grid& grid, double t,
                                             DerivativeMode mode);

/// Psi(Q, t) = <Q;t|psi;t>_S: the Schrodinger-evolved state (spectral route)
/// pulled back through the frame's dense T(t)^dagger.
WaveFunction moving_wavefunction(const MovingFrame& frame, const WaveFunction& initial);

/// max_t ||Psi(., t) - Psi(., 0)||_2 (continuum norm).
CheckResult time_independence_check(std::shared_ptr<const Propagator> propagator, const WaveFunction& initial,
                                    std::span<const double> times, double tolerance = 1e-8);

/// ||T(t)^dagger T(t) - I||_F.
CheckResult unitarity_check(const MovingFrame& frame, double tolerance = 1e-9);
/// ||T(t1) T(t2) - T(t1 + t2)||_F.
CheckResult group_law_check(const Propagator& propagator, double t1, double t2, double tolerance = 1e-9);
/// ||T(t)^dagger q T(t) - Qop(-t)||_F: the frame runs opposite to Heisenberg evolution.
CheckResult heisenberg_duality_check(const Propagator& propagator, double t, double tolerance = 1e-8);

}  // namespace qmframe::evolution
