#include "qmframe/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "finite_difference.hpp"

namespace qmframe::kernels {

namespace {

constexpr double kSingularGuard = 1e-6;

// Phase of the position kernel as a x^2 + b x + const in one argument, the
// other argument held at `other`. Free and oscillator kernels are symmetric.
struct Chirp {
  double a;
  double b;
};

Chirp position_chirp(const SystemParams& p, double t, double other) {
  if (p.system == System::Free) {
    const double c = p.mass / (p.hbar * t);
    return {0.5 * c, -c * other};
  }
  const double w = p.frequency();
  const double s = std::sin(w * t);
  const double c = p.mass * w / (p.hbar * s);
  return {0.5 * c * std::cos(w * t), -c * other};
}

// d(phase)/dx of kernel(spec, q, x, t); linear in x.
double phase_rate(const KernelSpec& spec, double q, double x, double t) {
  const SystemParams& p = spec.params;
  const bool position = spec.representation == Representation::PositionQ;
  if (p.system == System::Free)
    return position ? p.mass * (x - q) / (p.hbar * t) : (q - x * t / p.mass) / p.hbar;
  const double w = p.frequency();
  if (position) return p.mass * w * (x * std::cos(w * t) - q) / (p.hbar * std::sin(w * t));
  return (q / std::cos(w * t) - x * std::tan(w * t) / (p.mass * w)) / p.hbar;
}

// Largest |phase_rate| over x in [lo, hi].
double max_rate(const KernelSpec& spec, double q, double lo, double hi, double t) {
  return std::max(std::abs(phase_rate(spec, q, lo, t)), std::abs(phase_rate(spec, q, hi, t)));
}

// Grid quadrature of K(q, x) phi(x) aliases where the kernel phase rate
// reaches the sampling wavenumber 2 k_max. Up to 0.8 k_max of that is left
// for the spectrum of phi itself.
constexpr double kResolvedFraction = 1.2;

[[noreturn]] void throw_singular(const KernelSpec& spec, double t) {
  std::ostringstream os;
  os << to_string(spec.system()) << (spec.representation == Representation::PositionQ ? " position" : " momentum")
     << " kernel is singular or off its principal branch at t = " << t;
  throw Error(ErrorKind::SingularTime, os.str());
}

void require_position(const KernelSpec& spec, std::string_view what) {
  if (spec.representation != Representation::PositionQ)
    throw Error(ErrorKind::UnsupportedCombination, std::string(what) + " is defined for the position kernel only");
}

void require_harmonic(const SystemParams& p, std::string_view what) {
  if (p.system != System::Harmonic)
    throw Error(ErrorKind::UnsupportedCombination, std::string(what) + " needs the harmonic oscillator");
}

double oscillator_length(const SystemParams& p) { return std::sqrt(p.hbar / (p.mass * p.frequency())); }

}  // namespace

bool in_window(const KernelSpec& spec, double t) {
  spec.params.validate();
  if (!std::isfinite(t)) return false;
  const bool position = spec.representation == Representation::PositionQ;
  if (spec.system() == System::Free) return position ? t > 0.0 : true;
  const double wt = spec.params.frequency() * t;
  if (position) return wt > 0.0 && wt < kPi && std::sin(wt) >= kSingularGuard;
  return wt > -kPi / 2 && wt < kPi && std::abs(std::cos(wt)) >= kSingularGuard;
}

cplx kernel(const KernelSpec& spec, double q, double x, double t) {
  if (!in_window(spec, t)) throw_singular(spec, t);
  const SystemParams& p = spec.params;
  const double m = p.mass;
  const double hbar = p.hbar;

  if (spec.representation == Representation::PositionQ) {
    if (spec.system() == System::Free) {
      const double d = q - x;
      const cplx pre = std::sqrt(cplx(0.0, -m / (2.0 * kPi * hbar * t)));
      return pre * std::exp(kI * (m * d * d / (2.0 * hbar * t)));
    }
    const double w = p.frequency();
    const double s = std::sin(w * t);
    const double c = std::cos(w * t);
    const cplx pre = std::sqrt(cplx(0.0, -m * w / (2.0 * kPi * hbar * s)));
    return pre * std::exp(kI * (m * w / (hbar * s)) * (0.5 * (q * q + x * x) * c - q * x));
  }

  if (spec.system() == System::Free)
    return std::exp(kI * ((q * x - x * x * t / (2.0 * m)) / hbar)) / std::sqrt(2.0 * kPi * hbar);
  const double w = p.frequency();
  const double c = std::cos(w * t);
  const double tn = std::tan(w * t);
  // +0 imaginary part keeps cos < 0 on the upper side of the branch cut.
  const cplx pre = 1.0 / std::sqrt(cplx(2.0 * kPi * hbar * c, +0.0));
  const double phase = (q * x / c - (0.5 * m * w * w * q * q + x * x / (2.0 * m)) * tn / w) / hbar;
  return pre * std::exp(kI * phase);
}

DenseOperator kernel_matrix(const KernelSpec& spec, const Grid& grid, double t) {
  if (!in_window(spec, t)) throw_singular(spec, t);
  const Index n = grid.n();
  CMatrix k(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) k(i, j) = kernel(spec, grid.point(i), grid.point(j), t);
  return DenseOperator(grid, std::move(k), true);
}

double hermite(int n, double xi) {
  if (n < 0) throw Error(ErrorKind::NegativeIndex, "Hermite index must be non-negative");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * xi;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * xi * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double ho_eigenfunction(const SystemParams& params, double q, int n) {
  require_harmonic(params, "ho_eigenfunction");
  if (n < 0) throw Error(ErrorKind::NegativeIndex, "oscillator level must be non-negative");
  const double ell = oscillator_length(params);
  const double xi = q / ell;
  double prev = std::pow(kPi * ell * ell, -0.25) * std::exp(-0.5 * xi * xi);
  if (n == 0) return prev;
  double cur = std::sqrt(2.0) * xi * prev;
  for (int k = 1; k < n; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * xi * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

cplx moving_momentum_state(const SystemParams& params, double q_value, double p, double t) {
  params.validate();
  if (params.system != System::Free)
    throw Error(ErrorKind::UnsupportedCombination, "moving momentum state is tabulated for the free particle only");
  const double hbar = params.hbar;
  return std::exp(kI * (q_value * p / hbar + p * p * t / (2.0 * params.mass * hbar))) / std::sqrt(2.0 * kPi * hbar);
}

cplx moving_number_state(const SystemParams& params, double q_value, int n, double t) {
  require_harmonic(params, "moving_number_state");
  if (n < 0) throw Error(ErrorKind::NegativeIndex, "number state index must be non-negative");
  const double w = params.frequency();
  const double mw = params.mass * w / params.hbar;
  const double norm = std::pow(mw / kPi, 0.25) * std::exp(-0.5 * (n * std::log(2.0) + std::lgamma(n + 1.0)));
  const double xi = std::sqrt(mw) * q_value;
  return norm * hermite(n, xi) * std::exp(cplx(-0.5 * mw * q_value * q_value, (n + 0.5) * w * t));
}

cplx moving_coherent_state(const SystemParams& params, double q_value, cplx z, double t) {
  require_harmonic(params, "moving_coherent_state");
  const double w = params.frequency();
  const double mw = params.mass * w / params.hbar;
  const cplx rot = std::exp(kI * (w * t));
  const cplx exponent = -0.5 * mw * q_value * q_value + 2.0 * z * rot * q_value * std::sqrt(0.5 * mw) -
                        0.5 * z * z * rot * rot - 0.5 * std::norm(z) + kI * (0.5 * w * t);
  return std::pow(mw / kPi, 0.25) * std::exp(exponent);
}

TaperedRule::TaperedRule(double center, double flat_half_width, double taper_width, double step) {
  if (!(flat_half_width > 0.0) || !(taper_width >= 0.0) || !(step > 0.0))
    throw Error(ErrorKind::InvalidRange, "quadrature rule needs positive width and step");
  const double reach = flat_half_width + 7.0 * taper_width;
  const auto half = static_cast<long>(std::ceil(reach / step));
  nodes_.reserve(2 * half + 1);
  weights_.reserve(2 * half + 1);
  for (long i = -half; i <= half; ++i) {
    const double d = static_cast<double>(i) * step;
    double w = step;
    if (taper_width > 0.0)
      w *= 0.5 * std::erfc((std::abs(d) - flat_half_width) / taper_width);
    else if (std::abs(i) == half)
      w *= 0.5;
    nodes_.push_back(center + d);
    weights_.push_back(w);
  }
}

TaperedRule TaperedRule::for_chirp(double a, double b) {
  if (!(std::abs(a) > 0.0)) throw Error(ErrorKind::InvalidRange, "chirp rule needs a nonzero quadratic phase");
  constexpr double taper = 3.0;
  const double flat = std::max(30.0, 4.0 / std::abs(a));
  const double fmax = 2.0 * std::abs(a) * (flat + 7.0 * taper);
  const double step = std::min(0.02, kPi / (1.5 * fmax + 10.0));
  return TaperedRule(-b / (2.0 * a), flat, taper, step);
}

CheckResult kernel_vs_evolution_check(const KernelSpec& spec, const Propagator& propagator, double t,
                                      const WaveFunction& packet, double tolerance) {
  if (!(spec.params.system == propagator.params().system && spec.params.mass == propagator.params().mass &&
        spec.params.hbar == propagator.params().hbar && spec.params.omega == propagator.params().omega))
    throw Error(ErrorKind::GridMismatch, "kernel and propagator describe different systems");
  if (!(packet.grid == propagator.grid())) throw Error(ErrorKind::GridMismatch, "packet lives on another grid");
  const Grid& grid = packet.grid;
  const double hbar = spec.params.hbar;

  WaveFunction input = packet;
  if (spec.representation == Representation::MomentumP) {
    // Momentum amplitudes sampled at the grid coordinates read as momenta.
    CVector amp(grid.n());
    for (Index k = 0; k < grid.n(); ++k) {
      cplx sum = 0.0;
      for (Index j = 0; j < grid.n(); ++j) sum += std::exp(-kI * (grid.point(k) * grid.point(j) / hbar)) * packet.amp(j);
      amp(k) = sum * grid.dq() / std::sqrt(2.0 * kPi * hbar);
    }
    input = WaveFunction(grid, std::move(amp));
  }

  // Grid quadrature is only meaningful at output points q where the kernel
  // phase stays resolved wherever the input carries weight. phase_rate is
  // linear in x, so the resolved inputs form an interval; the aliased part
  // is bounded by |K| times the input's L1 weight outside it.
  std::vector<double> cumulative(grid.n() + 1, 0.0);
  for (Index j = 0; j < grid.n(); ++j) cumulative[j + 1] = cumulative[j] + std::abs(input.amp(j)) * grid.dq();
  const double limit = kResolvedFraction * grid.k_max();
  const double modulus = std::abs(kernel(spec, 0.0, 0.0, t));
  const auto resolves = [&](double q) {
    const double r0 = phase_rate(spec, q, 0.0, t);
    const double slope = phase_rate(spec, q, 1.0, t) - r0;
    double lo = grid.q_min();
    double hi = grid.q_max();
    if (slope != 0.0) {
      const double x1 = (-limit - r0) / slope;
      const double x2 = (limit - r0) / slope;
      lo = std::max(lo, std::min(x1, x2));
      hi = std::min(hi, std::max(x1, x2));
    } else if (std::abs(r0) > limit) {
      return false;
    }
    if (hi < lo) return false;
    const auto j_lo = static_cast<std::size_t>(std::ceil((lo - grid.q_min()) / grid.dq()));
    const auto j_hi = static_cast<std::size_t>(std::floor((hi - grid.q_min()) / grid.dq())) + 1;
    const double outside = cumulative.back() - (cumulative[j_hi] - cumulative[j_lo]);
    return modulus * outside <= 0.01 * tolerance * packet.norm();
  };

  const WaveFunction by_kernel = apply(kernel_matrix(spec, grid, t), input);
  const WaveFunction by_evolution = propagator.evolve(packet, t);
  CVector diff = CVector::Zero(grid.n());
  CVector unresolved = CVector::Zero(grid.n());
  Index resolved = 0;
  for (Index i = 0; i < grid.n(); ++i) {
    if (resolves(grid.point(i))) {
      diff(i) = by_kernel.amp(i) - by_evolution.amp(i);
      ++resolved;
    } else {
      unresolved(i) = by_evolution.amp(i);
    }
  }
  const double outside = WaveFunction(grid, unresolved).norm() / packet.norm();
  if (outside > tolerance) {
    std::ostringstream os;
    os << "grid does not resolve the kernel where the evolved state lives (unresolved weight " << outside << ")";
    return skipped_result(os.str()).with("t", t);
  }
  const double err = WaveFunction(grid, diff).norm() / packet.norm();
  return make_result(err, tolerance)
      .with("t", t)
      .with("resolved_fraction", static_cast<double>(resolved) / static_cast<double>(grid.n()));
}

CheckResult kernel_vs_evolution_check(const KernelSpec& spec, const Grid& grid, double t, const WaveFunction& packet,
                                      double tolerance) {
  return kernel_vs_evolution_check(spec, Propagator(spec.params, grid), t, packet, tolerance);
}

CheckResult kernel_composition_check(const KernelSpec& spec, double t1, double t2, std::span<const PointPair> pairs,
                                     double tolerance) {
  require_position(spec, "kernel composition");
  if (t2 == 0.0) return make_result(0.0, tolerance).with("note", "identity composition");
  for (double t : {t1, t2, t1 + t2})
    if (!in_window(spec, t)) throw_singular(spec, t);
  const SystemParams& p = spec.params;
  double worst = 0.0;
  for (const PointPair& pair : pairs) {
    const Chirp c1 = position_chirp(p, t1, pair.q);
    const Chirp c2 = position_chirp(p, t2, pair.other);
    const TaperedRule rule = TaperedRule::for_chirp(c1.a + c2.a, c1.b + c2.b);
    const cplx composed =
        rule.integrate([&](double x) { return kernel(spec, pair.q, x, t1) * kernel(spec, x, pair.other, t2); });
    worst = std::max(worst, std::abs(composed - kernel(spec, pair.q, pair.other, t1 + t2)));
  }
  return make_result(worst, tolerance).with("t1", t1).with("t2", t2);
}

double kernel_schrodinger_residual(const KernelSpec& spec, const SpaceTimePoint& point, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidRange, "difference step must be positive");
  for (double t : {point.t - h, point.t + h})
    if (!in_window(spec, t)) throw_singular(spec, t);
  const SystemParams& p = spec.params;
  const auto in_q = [&](double q) { return kernel(spec, q, point.other, point.t); };
  const auto in_t = [&](double t) { return kernel(spec, point.q, point.other, t); };
  const cplx k = in_q(point.q);
  const cplx lhs = kI * p.hbar * detail::central_first(in_t, point.t, h);
  const cplx rhs = -(p.hbar * p.hbar / (2.0 * p.mass)) * detail::central_second(in_q, point.q, h) + p.potential(point.q) * k;
  return std::abs(lhs - rhs) / std::abs(k);
}

CheckResult kernel_schrodinger_check(const KernelSpec& spec, std::span<const SpaceTimePoint> points, double h,
                                     double tolerance) {
  double worst = 0.0;
  for (const SpaceTimePoint& pt : points) worst = std::max(worst, kernel_schrodinger_residual(spec, pt, h));
  return make_result(worst, tolerance).with("points", std::to_string(points.size())).with("h", h);
}

CheckResult moving_momentum_check(const SystemParams& params, double t, std::span<const PointPair> pairs,
                                  double tolerance) {
  const KernelSpec spec{Representation::PositionQ, params};
  if (!in_window(spec, t)) throw_singular(spec, t);
  double worst = 0.0;
  for (const PointPair& pair : pairs) {
    const double mom = pair.other;
    const Chirp c = position_chirp(params, t, pair.q);
    // conj(K) flips the chirp; the plane wave adds p/hbar to the linear term.
    const TaperedRule rule = TaperedRule::for_chirp(-c.a, -c.b + mom / params.hbar);
    const cplx integral = rule.integrate([&](double q) {
      return std::conj(kernel(spec, q, pair.q, t)) * std::exp(kI * (mom * q / params.hbar));
    }) / std::sqrt(2.0 * kPi * params.hbar);
    worst = std::max(worst, std::abs(integral - moving_momentum_state(params, pair.q, mom, t)));
  }
  return make_result(worst, tolerance).with("t", t);
}

CheckResult moving_number_check(const SystemParams& params, double t, int n_max, std::span<const double> q_values,
                                double tolerance) {
  require_harmonic(params, "moving_number_check");
  if (n_max < 0) throw Error(ErrorKind::NegativeIndex, "number state index must be non-negative");
  const KernelSpec spec{Representation::PositionQ, params};
  if (!in_window(spec, t)) throw_singular(spec, t);
  const double ell = oscillator_length(params);
  const double reach = ell * (std::sqrt(2.0 * n_max + 1.0) + 12.0);

  double worst = 0.0;
  for (double qv : q_values) {
    const Chirp c = position_chirp(params, t, qv);
    const double fmax = 2.0 * std::abs(c.a) * reach + std::abs(c.b) + (std::sqrt(2.0 * n_max + 1.0) + 12.0) / ell;
    const TaperedRule rule(0.0, reach, 0.0, kPi / (2.0 * fmax));
    std::vector<cplx> kbar;
    kbar.reserve(rule.nodes().size());
    for (double q : rule.nodes()) kbar.push_back(std::conj(kernel(spec, q, qv, t)));
    for (int n = 0; n <= n_max; ++n) {
      cplx sum = 0.0;
      for (std::size_t i = 0; i < kbar.size(); ++i)
        sum += rule.weights()[i] * kbar[i] * ho_eigenfunction(params, rule.nodes()[i], n);
      worst = std::max(worst, std::abs(sum - moving_number_state(params, qv, n, t)));
    }
  }
  return make_result(worst, tolerance).with("n_max", std::to_string(n_max)).with("t", t);
}

CheckResult number_orthonormality_check(const SystemParams& params, double t, int n_max, double tolerance) {
  require_harmonic(params, "number_orthonormality_check");
  if (n_max < 0) throw Error(ErrorKind::NegativeIndex, "number state index must be non-negative");
  const double ell = oscillator_length(params);
  const double reach = ell * (std::sqrt(2.0 * n_max + 1.0) + 12.0);
  const TaperedRule rule(0.0, reach, 0.0, ell * 0.05);
  const auto count = static_cast<Index>(rule.nodes().size());
  CMatrix states(count, n_max + 1);
  for (Index i = 0; i < count; ++i)
    for (int n = 0; n <= n_max; ++n) states(i, n) = moving_number_state(params, rule.nodes()[i], n, t);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights().data(), count);
  const CMatrix gram = states.adjoint() * w.cast<cplx>().asDiagonal() * states;
  const double err = (gram - CMatrix::Identity(n_max + 1, n_max + 1)).cwiseAbs().maxCoeff();
  return make_result(err, tolerance).with("n_max", std::to_string(n_max)).with("t", t);
}

std::pair<cplx, int> coherent_number_sum(const SystemParams& params, double q_value, cplx z, double t) {
  require_harmonic(params, "coherent_number_sum");
  constexpr int kMaxTerms = 400;
  const double peak = std::norm(z);
  const double bound = std::pow(params.mass * params.frequency() / (kPi * params.hbar), 0.25);
  cplx sum = 0.0;
  for (int n = 0; n < kMaxTerms; ++n) {
    // <n|z> = exp(-|z|^2/2) z^n / sqrt(n!)
    const double log_mag =
        -0.5 * peak + (n == 0 ? 0.0 : n * std::log(std::abs(z))) - 0.5 * std::lgamma(n + 1.0);
    const cplx coeff = std::abs(z) == 0.0 ? cplx(n == 0 ? std::exp(-0.5 * peak) : 0.0)
                                          : std::exp(log_mag) * std::exp(kI * (n * std::arg(z)));
    if (n > peak && bound * std::abs(coeff) < 1e-14) return {sum, n};
    sum += moving_number_state(params, q_value, n, t) * coeff;
  }
  warn("coherent number sum hit its term cap; |z| is too large for the expansion");
  return {sum, kMaxTerms};
}

CheckResult moving_coherent_check(const SystemParams& params, double t, std::span<const cplx> zs,
                                  std::span<const double> q_values, double tolerance) {
  double worst = 0.0;
  int cutoff = 0;
  for (cplx z : zs)
    for (double qv : q_values) {
      const auto [sum, n] = coherent_number_sum(params, qv, z, t);
      cutoff = std::max(cutoff, n);
      worst = std::max(worst, std::abs(sum - moving_coherent_state(params, qv, z, t)));
    }
  return make_result(worst, tolerance).with("max_terms", std::to_string(cutoff)).with("t", t);
}

CheckResult fourier_duality_check(const SystemParams& params, double t, std::span<const PointPair> pairs,
                                  double tolerance) {
  const KernelSpec position{Representation::PositionQ, params};
  const KernelSpec momentum{Representation::MomentumP, params};
  if (!in_window(position, t)) throw_singular(position, t);
  if (!in_window(momentum, t)) throw_singular(momentum, t);
  double worst = 0.0;
  for (const PointPair& pair : pairs) {
    const Chirp c = position_chirp(params, t, pair.q);
    if (std::abs(c.a) < 0.05) {
      std::ostringstream os;
      os << "quadratic phase " << c.a << " too flat for quadrature at t = " << t;
      return skipped_result(os.str());
    }
    const double mom = pair.other;
    const TaperedRule rule = TaperedRule::for_chirp(c.a, c.b + mom / params.hbar);
    const cplx integral = rule.integrate([&](double x) {
      return kernel(position, pair.q, x, t) * std::exp(kI * (mom * x / params.hbar));
    }) / std::sqrt(2.0 * kPi * params.hbar);
    worst = std::max(worst, std::abs(integral - kernel(momentum, pair.q, mom, t)));
  }
  return make_result(worst, tolerance).with("t", t);
}

CheckResult kernel_unitarity_check(const KernelSpec& spec, double t, double tolerance) {
  if (!in_window(spec, t)) throw_singular(spec, t);
  const SystemParams& p = spec.params;
  const double unit = std::sqrt(p.hbar / (p.mass * (p.system == System::Harmonic ? p.frequency() : 1.0)));
  const Grid grid(-24.0 * unit, 24.0 * unit, 1201);
  const double mom_unit = p.hbar / unit;
  // Inputs are read in the kernel's own representation; for MomentumP the
  // second argument is a momentum, so the packets are rescaled accordingly.
  const double scale = spec.representation == Representation::PositionQ ? unit : mom_unit;
  const double reach = 16.0 * scale;
  double rate = 0.0;
  for (double q : {grid.q_min(), grid.q_max()}) rate = std::max(rate, max_rate(spec, q, -reach, reach, t));
  const double step = std::min(0.04 * scale, kResolvedFraction * kPi / rate);
  const auto n_in = static_cast<Index>(std::ceil(2.0 * reach / step)) + 1;
  if (n_in > 20000) {
    std::ostringstream os;
    os << "kernel at t = " << t << " oscillates too fast for direct quadrature";
    return skipped_result(os.str()).with("t", t);
  }
  const Grid input_grid(-reach, reach, n_in);

  const WaveFunction inputs[] = {gaussian_packet(input_grid, -scale, 0.5 * p.hbar / scale, scale, p.hbar),
                                 gaussian_packet(input_grid, scale, -0.3 * p.hbar / scale, 1.3 * scale, p.hbar),
                                 gaussian_packet(input_grid, 0.0, 0.0, 0.8 * scale, p.hbar)};
  std::vector<WaveFunction> outputs;
  for (const WaveFunction& in : inputs) {
    CVector amp(grid.n());
    for (Index i = 0; i < grid.n(); ++i) {
      cplx sum = 0.0;
      for (Index j = 0; j < input_grid.n(); ++j) sum += kernel(spec, grid.point(i), input_grid.point(j), t) * in.amp(j);
      amp(i) = sum * input_grid.dq();
    }
    outputs.emplace_back(grid, std::move(amp));
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < outputs.size(); ++a)
    for (std::size_t b = a; b < outputs.size(); ++b)
      worst = std::max(worst, std::abs(inner_product(outputs[a], outputs[b]) - inner_product(inputs[a], inputs[b])));
  return make_result(worst, tolerance).with("t", t);
}

}  // namespace qmframe::kernels
