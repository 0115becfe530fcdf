#include "qmframe/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qmframe::evolution {

namespace {

// Fraction of the phase-space box radius an interior state may reach. For
// the oscillator on a balanced grid sqrt(2.4/pi) admits exactly 60% of the
// eigenvectors; the sheared free-particle disc needs a wider margin.
const double kHarmonicRadiusFraction = std::sqrt(2.4 / kPi);
constexpr double kFreeRadiusFraction = 0.8;
constexpr double kMaxSubspaceFraction = 0.6;

// Number of oscillator levels n with 2n + 1 <= r^2.
Index levels_within(double r) { return r * r < 1.0 ? 0 : static_cast<Index>(std::floor((r * r - 1.0) / 2.0)) + 1; }

double largest_singular_value(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

Grid balanced_grid(const SystemParams& params, Index n) {
  params.validate();
  const double w = params.system == System::Harmonic ? params.frequency() : 1.0;
  const double a = std::sqrt(kPi * static_cast<double>(n) * params.hbar / (2.0 * params.mass * w));
  return Grid(-a, a, n);
}

DenseOperator closed_form_position(const SystemParams& params, const Grid& grid, double t) {
  const DenseOperator q = position_operator(grid);
  const DenseOperator p = momentum_operator(grid, params.hbar);
  if (params.system == System::Free) return q - cplx(t / params.mass) * p;
  const double w = params.frequency();
  return cplx(std::cos(w * t)) * q - cplx(std::sin(w * t) / (params.mass * w)) * p;
}

DenseOperator closed_form_momentum(const SystemParams& params, const Grid& grid, double t) {
  const DenseOperator p = momentum_operator(grid, params.hbar);
  if (params.system == System::Free) return p;
  const double w = params.frequency();
  const DenseOperator q = position_operator(grid);
  return cplx(params.mass * w * std::sin(w * t)) * q + cplx(std::cos(w * t)) * p;
}

MovingFrame make_frame(std::shared_ptr<const Propagator> propagator, double t) {
  const SystemParams& params = propagator->params();
  const Grid& grid = propagator->grid();
  if (params.system == System::Harmonic && t != 0.0 && std::abs(std::sin(params.frequency() * t)) < 1e-6) {
    std::ostringstream os;
    os << "omega t = " << params.frequency() * t << " is within 1e-6 of a caustic; position kernels are singular here";
    warn(os.str());
  }
  DenseOperator T = propagator->evolution_operator(t);
  const CMatrix td = T.mat.adjoint();
  const CMatrix q = position_operator(grid).mat;
  const CMatrix p = momentum_operator(grid, params.hbar).mat;
  DenseOperator qop(grid, T.mat * q * td);
  DenseOperator pop(grid, T.mat * p * td);
  return MovingFrame{params, grid, t, std::move(T), std::move(qop), std::move(pop), std::move(propagator)};
}

MovingFrame make_frame(const SystemParams& params, const Grid& grid, double t) {
  return make_frame(std::make_shared<const Propagator>(params, grid), t);
}

CMatrix interior_subspace(const Propagator& propagator, double t) {
  const SystemParams& params = propagator.params();
  const Grid& grid = propagator.grid();
  const double a = std::min(-grid.q_min(), grid.q_max());
  if (!(a > 0.0)) throw Error(ErrorKind::InvalidRange, "interior subspace needs the origin inside the grid");
  const double k_max = grid.k_max();
  const auto cap = static_cast<Index>(kMaxSubspaceFraction * static_cast<double>(grid.n()));

  Index count = 0;
  if (params.system == System::Harmonic) {
    const double ell = std::sqrt(params.hbar / (params.mass * params.frequency()));
    count = std::min(cap, levels_within(kHarmonicRadiusFraction * std::min(a / ell, k_max * ell)));
  } else {
    const double w_ref = params.hbar * k_max / (params.mass * a);
    const double ell = std::sqrt(a / k_max);
    const double shear = std::sqrt(1.0 + w_ref * w_ref * t * t);
    count = std::min(cap, levels_within(kFreeRadiusFraction * std::min(a / (ell * shear * std::sqrt(shear)), k_max * ell)));
  }
  if (count < 4) {
    std::ostringstream os;
    os << "grid of " << grid.n() << " points leaves only " << count << " interior states at t = " << t;
    throw Error(ErrorKind::InvalidRange, os.str());
  }
  if (params.system == System::Harmonic) return propagator.modes().leftCols(count).cast<cplx>();

  const double w_ref = params.hbar * k_max / (params.mass * a);
  const Propagator reference(SystemParams::harmonic(params.mass, w_ref, params.hbar), grid);
  return reference.modes().leftCols(count).cast<cplx>();
}

CheckResult closed_form_operator_check(const MovingFrame& frame, double tolerance) {
  const CMatrix b = interior_subspace(*frame.propagator, frame.t);
  const CMatrix dq = frame.Qop.effective() - closed_form_position(frame.params, frame.grid, frame.t).effective();
  const CMatrix dp = frame.Pop.effective() - closed_form_momentum(frame.params, frame.grid, frame.t).effective();
  const double q_dist = (b.adjoint() * dq * b).norm();
  const double p_dist = (b.adjoint() * dp * b).norm();
  return make_result(std::max(q_dist, p_dist), tolerance)
      .with("Q_distance", q_dist)
      .with("P_distance", p_dist)
      .with("subspace_dim", std::to_string(b.cols()));
}

std::vector<WaveFunction> interior_test_packets(const Grid& grid, double hbar) {
  const double center = 0.5 * (grid.q_min() + grid.q_max());
  const double sigma = std::max(1.0, 4.0 * grid.dq());
  const double offsets[] = {-2.0, -1.0, 0.0, 1.0, 2.0};
  const double boosts[] = {0.5, -0.3, 0.0, 0.3, -0.5};
  std::vector<WaveFunction> packets;
  for (int i = 0; i < 5; ++i)
    packets.push_back(gaussian_packet(grid, center + offsets[i] * sigma, boosts[i], sigma, hbar));
  return packets;
}

CheckResult commutator_residual(const MovingFrame& frame, std::span<const WaveFunction> states, double tolerance) {
  const DenseOperator c = commutator(frame.Qop, frame.Pop);
  double worst = 0.0;
  for (const WaveFunction& psi : states)
    worst = std::max(worst, std::abs(expectation(c, psi) - kI * frame.params.hbar));
  return make_result(worst, tolerance).with("states", std::to_string(states.size()));
}

WaveFunction moving_base_state(const MovingFrame& frame, double q_value, DeltaKind kind) {
  const WaveFunction delta =
      kind == DeltaKind::Raw ? discrete_delta(frame.grid, q_value) : smoothed_delta(frame.grid, q_value);
  return apply(frame.T, delta);
}

CheckResult moving_base_eigen_check(const MovingFrame& frame, std::span<const double> q_values, double tolerance) {
  double worst = 0.0;
  for (double q : q_values) {
    const double eigenvalue = frame.grid.point(frame.grid.nearest_index(q));
    const WaveFunction state = moving_base_state(frame, q, DeltaKind::Raw);
    const CVector image = frame.Qop.effective() * state.amp;
    worst = std::max(worst, (image - eigenvalue * state.amp).norm() / state.amp.norm());
  }
  return make_result(worst, tolerance).with("points", std::to_string(q_values.size()));
}

CheckResult transformed_hamiltonian_residual(const Propagator& propagator, double t, DerivativeMode mode,
                                             double tolerance) {
  const double hbar = propagator.params().hbar;
  const CMatrix& h = propagator.hamiltonian().mat;
  const CMatrix tt = propagator.evolution_operator(t).mat;
  const CMatrix td = tt.adjoint();

  CMatrix d_td;
  std::string mode_name;
  double dt = 0.0;
  if (std::holds_alternative<AnalyticDerivative>(mode)) {
    d_td = (kI / hbar) * (h * td);
    mode_name = "analytic_derivative";
  } else {
    dt = std::get<FiniteDifference>(mode).dt;
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidRange, "finite-difference step must be positive");
    d_td = (propagator.evolution_operator(t + dt).mat.adjoint() - propagator.evolution_operator(t - dt).mat.adjoint()) /
           (2.0 * dt);
    mode_name = "finite_difference";
  }
  const CMatrix k = td * h * tt + (kI * hbar) * (d_td * tt);
  const CMatrix b = interior_subspace(propagator, t);
  CheckResult r = make_result(largest_singular_value(b.adjoint() * k * b), tolerance);
  r.with("mode", mode_name).with("subspace_dim", std::to_string(b.cols()));
  if (dt > 0.0) r.with("dt", dt);
  return r;
}

CheckResult transformed_hamiltonian_residual(const Propagator& propagator, double t, DerivativeMode mode) {
  const double tol = std::holds_alternative<AnalyticDerivative>(mode) ? 1e-9 : 1e-3;
  return transformed_hamiltonian_residual(propagator, t, mode, tol);
}

CheckResult transformed_hamiltonian_residual(const SystemParams& params, const Grid& grid, double t,
                                             DerivativeMode mode) {
  return transformed_hamiltonian_residual(Propagator(params, grid), t, mode);
}

WaveFunction moving_wavefunction(const MovingFrame& frame, const WaveFunction& initial) {
  const WaveFunction evolved = frame.propagator->evolve(initial, frame.t);
  return apply(adjoint(frame.T), evolved);
}

CheckResult time_independence_check(std::shared_ptr<const Propagator> propagator, const WaveFunction& initial,
                                    std::span<const double> times, double tolerance) {
  const WaveFunction at_zero = moving_wavefunction(make_frame(propagator, 0.0), initial);
  double worst = 0.0;
  for (double t : times) {
    const WaveFunction moved = moving_wavefunction(make_frame(propagator, t), initial);
    worst = std::max(worst, WaveFunction(initial.grid, moved.amp - at_zero.amp).norm());
  }
  return make_result(worst, tolerance).with("times", std::to_string(times.size()));
}

CheckResult unitarity_check(const MovingFrame& frame, double tolerance) {
  return make_result(unitarity_defect(frame.T), tolerance);
}

CheckResult group_law_check(const Propagator& propagator, double t1, double t2, double tolerance) {
  const CMatrix product = propagator.evolution_operator(t1).mat * propagator.evolution_operator(t2).mat;
  return make_result((product - propagator.evolution_operator(t1 + t2).mat).norm(), tolerance)
      .with("t1", t1)
      .with("t2", t2);
}

CheckResult heisenberg_duality_check(const Propagator& propagator, double t, double tolerance) {
  const CMatrix tt = propagator.evolution_operator(t).mat;
  const CMatrix heisenberg = tt.adjoint() * position_operator(propagator.grid()).mat * tt;
  const CMatrix backward = propagator.evolution_operator(-t).mat;
  const CMatrix frame_q = backward * position_operator(propagator.grid()).mat * backward.adjoint();
  return make_result((heisenberg - frame_q).norm(), tolerance);
}

}  // namespace qmframe::evolution
