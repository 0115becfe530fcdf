#include "qmframe/hamilton_jacobi.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "finite_difference.hpp"
#include "qmframe/kernels.hpp"

namespace qmframe::hj {

namespace {

constexpr double kSingularGuard = 1e-6;

[[noreturn]] void throw_singular(const GeneratingFunction& w, double t) {
  std::ostringstream os;
  os << to_string(w.system()) << " W(q, " << (w.rep() == GenRep::qQ ? "Q" : "P") << ", t) is singular at t = " << t;
  throw Error(ErrorKind::SingularTime, os.str());
}

// Newton iteration for f(x) = target with a constant-sign derivative; W is
// quadratic, so one step is exact up to rounding and the loop is a safeguard.
template <class F, class D>
double solve_linear_like(F&& f, D&& df, double target, double x0, std::string_view what) {
  double x = x0;
  for (int iter = 0; iter < 50; ++iter) {
    const double slope = df(x);
    if (!(std::abs(slope) > 1e-12)) throw Error(ErrorKind::DegenerateHessian, std::string(what) + " has a vanishing second derivative");
    const double step = (f(x) - target) / slope;
    x -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x))) break;
  }
  return x;
}

double energy(const SystemParams& params, double q, double p) {
  return p * p / (2.0 * params.mass) + params.potential(q);
}

}  // namespace

std::string_view to_string(GenRep rep) { return rep == GenRep::qQ ? "qQ" : "qP"; }

GeneratingFunction::GeneratingFunction(GenRep rep, const SystemParams& params) : rep_(rep), params_(params) {
  params_.validate();
}

bool GeneratingFunction::in_domain(double t) const {
  if (!std::isfinite(t)) return false;
  if (params_.system == System::Free) return rep_ == GenRep::qP || std::abs(t) >= kSingularGuard;
  const double wt = params_.frequency() * t;
  return rep_ == GenRep::qQ ? std::abs(std::sin(wt)) >= kSingularGuard : std::abs(std::cos(wt)) >= kSingularGuard;
}

Partials GeneratingFunction::evaluate(double q, double x, double t) const {
  if (!in_domain(t)) throw_singular(*this, t);
  const double m = params_.mass;
  if (params_.system == System::Free) {
    if (rep_ == GenRep::qQ) {
      const double d = q - x;
      const double k = m / t;
      return {0.5 * k * d * d, k * d, -k * d, -0.5 * k * d * d / t, k, k, -k};
    }
    return {q * x - x * x * t / (2.0 * m), x, q - x * t / m, -x * x / (2.0 * m), 0.0, -t / m, 1.0};
  }

  const double w = params_.frequency();
  const double s = std::sin(w * t);
  const double c = std::cos(w * t);
  if (rep_ == GenRep::qQ) {
    const double k = m * w / s;
    return {k * (0.5 * (q * q + x * x) * c - q * x),
            k * (q * c - x),
            k * (x * c - q),
            m * w * w * (q * x * c - 0.5 * (q * q + x * x)) / (s * s),
            k * c,
            k * c,
            -k};
  }
  const double tn = s / c;
  const double e = 0.5 * m * w * w * q * q + x * x / (2.0 * m);
  return {q * x / c - e * tn / w,
          x / c - m * w * q * tn,
          q / c - x * tn / (m * w),
          q * x * w * s / (c * c) - e / (c * c),
          -m * w * tn,
          -tn / (m * w),
          1.0 / c};
}

GeneratingFunction generating(System system, GenRep rep, const SystemParams& params) {
  if (system != params.system)
    throw Error(ErrorKind::UnsupportedCombination, "generating function system differs from the params");
  return GeneratingFunction(rep, params);
}

double hj_residual(const GeneratingFunction& w, double q, double x, double t) {
  const Partials d = w.evaluate(q, x, t);
  return d.dq * d.dq / (2.0 * w.params().mass) + w.params().potential(q) + d.dt;
}

CheckResult hj_residual_check(const GeneratingFunction& w, std::span<const Sample> samples, double tolerance) {
  double worst = 0.0;
  for (const Sample& s : samples) worst = std::max(worst, std::abs(hj_residual(w, s.q, s.x, s.t)));
  return make_result(worst, tolerance)
      .with("representation", std::string(to_string(w.rep())))
      .with("points", std::to_string(samples.size()));
}

std::vector<Sample> random_samples(const GeneratingFunction& w, std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  double t_lo = 0.2;
  double t_hi = 2.0;
  if (w.system() == System::Free) {
    if (w.rep() == GenRep::qP) t_lo = -2.0;
  } else {
    const double w_inv = 1.0 / w.params().frequency();
    t_lo = (w.rep() == GenRep::qQ ? 0.3 : 0.1) * w_inv;
    t_hi = (w.rep() == GenRep::qQ ? kPi - 0.3 : 1.25) * w_inv;
  }
  std::uniform_real_distribution<double> time(t_lo, t_hi);
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double q = coord(rng);
    const double x = coord(rng);
    out.push_back({q, x, time(rng)});
  }
  return out;
}

std::vector<Sample> pde_samples(const GeneratingFunction& w, std::size_t count, std::mt19937_64& rng) {
  const SystemParams& p = w.params();
  const double freq = w.system() == System::Harmonic ? p.frequency() : 1.0;
  const double ell = std::sqrt(p.hbar / (p.mass * freq));
  const double x_scale = w.rep() == GenRep::qQ ? ell : p.hbar / ell;
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::uniform_real_distribution<double> time(0.5 / freq, 1.0 / freq);
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double q = ell * unit(rng);
    const double x = x_scale * unit(rng);
    out.push_back({q, x, time(rng)});
  }
  return out;
}

double f_function(const GeneratingFunction& w, double t) {
  const double a = w.evaluate(-1.0, 0.0, t).dqq;
  const double b = w.evaluate(1.0, 0.0, t).dqq;
  if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a)))
    throw Error(ErrorKind::NonQuadratic, "d^2W/dq^2 depends on q; F is only defined for quadratic W");
  return a / (2.0 * w.params().mass);
}

QuantumAction::QuantumAction(GeneratingFunction base) : base_(std::move(base)) {}

cplx QuantumAction::f_integral(double t) const {
  if (!base_.in_domain(t)) throw_singular(base_, t);
  if (base_.system() == System::Free) return base_.rep() == GenRep::qQ ? 0.5 * std::log(cplx(t, +0.0)) : cplx(0.0);
  const double wt = base_.params().frequency() * t;
  return 0.5 * std::log(cplx(base_.rep() == GenRep::qQ ? std::sin(wt) : std::cos(wt), +0.0));
}

cplx QuantumAction::value(double q, double x, double t) const {
  return base_.value(q, x, t) + kI * base_.params().hbar * f_integral(t);
}

QuantumAction quantum_action(const GeneratingFunction& w) { return QuantumAction(w); }

cplx semiclassical_wavefunction(const QuantumAction& action, double q, double x, double t) {
  return std::exp(kI * action.value(q, x, t) / action.base().params().hbar);
}

double se_residual(const QuantumAction& action, const Sample& at, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidRange, "difference step must be positive");
  const SystemParams& p = action.base().params();
  const auto in_q = [&](double q) { return semiclassical_wavefunction(action, q, at.x, at.t); };
  const auto in_t = [&](double t) { return semiclassical_wavefunction(action, at.q, at.x, t); };
  const cplx psi = in_q(at.q);
  const cplx lhs = kI * p.hbar * detail::central_first(in_t, at.t, h);
  const cplx rhs = -(p.hbar * p.hbar / (2.0 * p.mass)) * detail::central_second(in_q, at.q, h) + p.potential(at.q) * psi;
  return std::abs(lhs - rhs) / std::abs(psi);
}

CheckResult se_residual_check(const QuantumAction& action, std::span<const Sample> samples, double h,
                              double tolerance) {
  double worst = 0.0;
  for (const Sample& s : samples) worst = std::max(worst, se_residual(action, s, h));
  return make_result(worst, tolerance)
      .with("representation", std::string(to_string(action.base().rep())))
      .with("h", h)
      .with("points", std::to_string(samples.size()));
}

cplx kernel_ratio(const QuantumAction& action, double q, double x, double t) {
  const kernels::KernelSpec spec{
      action.base().rep() == GenRep::qQ ? kernels::Representation::PositionQ : kernels::Representation::MomentumP,
      action.base().params()};
  return semiclassical_wavefunction(action, q, x, t) / kernels::kernel(spec, q, x, t);
}

CheckResult kernel_proportionality_check(const QuantumAction& action, std::span<const Sample> samples,
                                         double tolerance) {
  if (samples.empty()) return skipped_result("no sample points");
  const cplx ref = kernel_ratio(action, samples[0].q, samples[0].x, samples[0].t);
  double worst = 0.0;
  for (const Sample& s : samples)
    worst = std::max(worst, std::abs(kernel_ratio(action, s.q, s.x, s.t) - ref) / std::abs(ref));
  return make_result(worst, tolerance).with("ratio_re", ref.real()).with("ratio_im", ref.imag());
}

CheckResult legendre_transform_check(const SystemParams& params, std::span<const Sample> samples, double tolerance) {
  const GeneratingFunction wq(GenRep::qQ, params);
  const GeneratingFunction wp(GenRep::qP, params);
  double worst = 0.0;
  for (const Sample& s : samples) {
    const double mom = s.x;
    const double q_star = solve_linear_like([&](double Q) { return -wq.evaluate(s.q, Q, s.t).dx; },
                                            [&](double Q) { return -wq.evaluate(s.q, Q, s.t).dxx; }, mom, s.q,
                                            "W(q, Q, t) in Q");
    const double legendre = wq.value(s.q, q_star, s.t) + q_star * mom;
    worst = std::max(worst, std::abs(legendre - wp.value(s.q, mom, s.t)));
  }
  return make_result(worst, tolerance).with("points", std::to_string(samples.size()));
}

CanonicalImage canonical_image(const GeneratingFunction& w, double q, double p, double t) {
  const auto dq = [&](double x) { return w.evaluate(q, x, t).dq; };
  const auto dqx = [&](double x) { return w.evaluate(q, x, t).dqx; };
  const double x = solve_linear_like(dq, dqx, p, q, "W mixed derivative");
  const Partials d = w.evaluate(q, x, t);
  if (w.rep() == GenRep::qQ) return {x, -d.dx};
  return {d.dx, x};
}

CanonicalImage frame_coordinates(const SystemParams& params, double q, double p, double t) {
  params.validate();
  if (params.system == System::Free) return {q - t * p / params.mass, p};
  const double w = params.frequency();
  const double s = std::sin(w * t);
  const double c = std::cos(w * t);
  return {q * c - p * s / (params.mass * w), params.mass * w * q * s + p * c};
}

CheckResult canonical_derivative_check(const SystemParams& params, std::span<const Sample> samples,
                                       double tolerance) {
  double worst = 0.0;
  std::size_t used = 0;
  for (GenRep rep : {GenRep::qQ, GenRep::qP}) {
    const GeneratingFunction w(rep, params);
    for (const Sample& s : samples) {
      if (!w.in_domain(s.t)) continue;
      const CanonicalImage got = canonical_image(w, s.q, s.x, s.t);
      const CanonicalImage want = frame_coordinates(params, s.q, s.x, s.t);
      worst = std::max({worst, std::abs(got.Q - want.Q), std::abs(got.P - want.P)});
      ++used;
    }
  }
  return make_result(worst, tolerance).with("evaluations", std::to_string(used));
}

PhasePoint classical_trajectory(const SystemParams& params, double q0, double p0, double t) {
  params.validate();
  if (params.system == System::Free) return {q0 + p0 * t / params.mass, p0, t};
  const double w = params.frequency();
  const double s = std::sin(w * t);
  const double c = std::cos(w * t);
  return {q0 * c + p0 * s / (params.mass * w), p0 * c - params.mass * w * q0 * s, t};
}

std::vector<PhasePoint> integrate_trajectory(const SystemParams& params, double q0, double p0, double t_end,
                                             double step, int stride) {
  params.validate();
  if (!(t_end >= 0.0) || !(step > 0.0) || stride < 1)
    throw Error(ErrorKind::InvalidRange, "trajectory needs t_end >= 0, step > 0 and stride >= 1");
  using State = std::array<double, 2>;
  const double m = params.mass;
  const double k = params.system == System::Harmonic ? m * params.frequency() * params.frequency() : 0.0;
  const auto rhs = [m, k](const State& x, State& dxdt, double) {
    dxdt[0] = x[1] / m;
    dxdt[1] = -k * x[0];
  };
  boost::numeric::odeint::runge_kutta4<State> stepper;
  State x{q0, p0};
  std::vector<PhasePoint> out{{q0, p0, 0.0}};
  const auto steps = static_cast<long>(std::floor(t_end / step));
  for (long i = 0; i < steps; ++i) {
    stepper.do_step(rhs, x, static_cast<double>(i) * step, step);
    if ((i + 1) % stride == 0) out.push_back({x[0], x[1], static_cast<double>(i + 1) * step});
  }
  const double t_last = static_cast<double>(steps) * step;
  if (t_end - t_last > 1e-15 * std::max(1.0, t_end)) {
    stepper.do_step(rhs, x, t_last, t_end - t_last);
    out.push_back({x[0], x[1], t_end});
  } else if (steps % stride != 0) {
    out.push_back({x[0], x[1], t_last});
  }
  return out;
}

CheckResult frame_constancy_check(const SystemParams& params, std::span<const PhasePoint> trajectory,
                                  double tolerance) {
  if (trajectory.empty()) return skipped_result("empty trajectory");
  const CanonicalImage first = frame_coordinates(params, trajectory[0].q, trajectory[0].p, trajectory[0].t);
  double worst = 0.0;
  for (const PhasePoint& pt : trajectory) {
    const CanonicalImage here = frame_coordinates(params, pt.q, pt.p, pt.t);
    worst = std::max({worst, std::abs(here.Q - first.Q), std::abs(here.P - first.P)});
  }
  return make_result(worst, tolerance).with("samples", std::to_string(trajectory.size()));
}

CheckResult energy_conservation_check(const SystemParams& params, std::span<const PhasePoint> trajectory,
                                      double tolerance) {
  if (trajectory.empty()) return skipped_result("empty trajectory");
  const double e0 = energy(params, trajectory[0].q, trajectory[0].p);
  double worst = 0.0;
  for (const PhasePoint& pt : trajectory) worst = std::max(worst, std::abs(energy(params, pt.q, pt.p) - e0));
  return make_result(e0 != 0.0 ? worst / std::abs(e0) : worst, tolerance).with("energy", e0);
}

CanonicalImage action_angle(const SystemParams& params, double q, double p, double t) {
  if (params.system != System::Harmonic)
    throw Error(ErrorKind::UnsupportedCombination, "the action-angle map is defined for the oscillator");
  const double w = params.frequency();
  return {std::atan2(params.mass * w * q, p) / w - t, energy(params, q, p)};
}

double action_angle_bracket(const SystemParams& params, double q, double p, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidRange, "difference step must be positive");
  const double period = 2.0 * kPi / params.frequency();
  const auto angle_diff = [&](double qa, double pa, double qb, double pb) {
    return std::remainder(action_angle(params, qa, pa, 0.0).Q - action_angle(params, qb, pb, 0.0).Q, period) /
           (2.0 * h);
  };
  const auto action_diff = [&](double qa, double pa, double qb, double pb) {
    return (action_angle(params, qa, pa, 0.0).P - action_angle(params, qb, pb, 0.0).P) / (2.0 * h);
  };
  const double dQ_dq = angle_diff(q + h, p, q - h, p);
  const double dQ_dp = angle_diff(q, p + h, q, p - h);
  const double dP_dq = action_diff(q + h, p, q - h, p);
  const double dP_dp = action_diff(q, p + h, q, p - h);
  return dQ_dq * dP_dp - dQ_dp * dP_dq;
}

CheckResult action_angle_check(const SystemParams& params, std::span<const PhasePoint> points, double h,
                               double tolerance, double p_min) {
  double worst = 0.0;
  std::size_t skipped = 0;
  for (const PhasePoint& pt : points) {
    if (std::abs(pt.p) < p_min) {
      ++skipped;
      continue;
    }
    worst = std::max(worst, std::abs(action_angle_bracket(params, pt.q, pt.p, h) - 1.0));
  }
  if (skipped == points.size()) return skipped_result("every point has |p| below the arctangent guard");
  CheckResult r = make_result(worst, tolerance);
  r.with("h", h).with("points", std::to_string(points.size() - skipped)).with("skipped_p_near_zero", std::to_string(skipped));
  return r;
}

CheckResult action_angle_orbit_check(const SystemParams& params, std::span<const PhasePoint> trajectory,
                                     double tolerance) {
  if (trajectory.empty()) return skipped_result("empty trajectory");
  const double w = params.frequency();
  const double m = params.mass;
  double raw_prev = std::atan2(m * w * trajectory[0].q, trajectory[0].p);
  double angle = raw_prev;
  const CanonicalImage first = action_angle(params, trajectory[0].q, trajectory[0].p, trajectory[0].t);
  double worst = 0.0;
  for (const PhasePoint& pt : trajectory) {
    const double raw = std::atan2(m * w * pt.q, pt.p);
    angle += std::remainder(raw - raw_prev, 2.0 * kPi);
    raw_prev = raw;
    const double q_here = angle / w - pt.t;
    const double p_here = energy(params, pt.q, pt.p);
    worst = std::max({worst, std::abs(q_here - first.Q), std::abs(p_here - first.P)});
  }
  return make_result(worst, tolerance).with("samples", std::to_string(trajectory.size()));
}

}  // namespace qmframe::hj
