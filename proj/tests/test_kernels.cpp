#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qmframe/kernels.hpp"
#include "test_support.hpp"

using namespace qmframe;
using namespace qmframe::kernels;

namespace {

const KernelSpec kFreeQ{Representation::PositionQ, SystemParams::free()};
const KernelSpec kHarmonicQ{Representation::PositionQ, SystemParams::harmonic()};

// H_n(x) = n! sum_m (-1)^m (2x)^(n-2m) / (m! (n-2m)!)
double hermite_explicit(int n, double x) {
  double sum = 0.0;
  for (int m = 0; 2 * m <= n; ++m)
    sum += std::pow(-1.0, m) * std::pow(2.0 * x, n - 2 * m) / (std::tgamma(m + 1.0) * std::tgamma(n - 2 * m + 1.0));
  return std::tgamma(n + 1.0) * sum;
}

double unit_gaussian(double q) { return std::pow(2.0 * kPi, -0.25) * std::exp(-q * q / 4.0); }

// Unit-width packet centred at 0 after free evolution (m = hbar = 1).
cplx spread_gaussian(double q, double t) {
  const cplx s = 1.0 + kI * t / 2.0;
  return std::pow(2.0 * kPi, -0.25) / std::sqrt(s) * std::exp(-q * q / (4.0 * s));
}

// Ground-state packet displaced to q0, m = omega = hbar = 1.
cplx coherent_orbit(double q, double q0, double t) {
  const double c = q - q0 * std::cos(t);
  return std::pow(kPi, -0.25) *
         std::exp(-0.5 * c * c - kI * (0.5 * t + q * q0 * std::sin(t) - 0.25 * q0 * q0 * std::sin(2.0 * t)));
}

// Plain trapezoid of K(q, x; t) f(x) over [lo, hi].
template <class F>
cplx push(const KernelSpec& spec, double q, double t, F&& f, double lo, double hi, double step) {
  const auto n = static_cast<long>(std::ceil((hi - lo) / step));
  const double h = (hi - lo) / static_cast<double>(n);
  cplx sum = 0.0;
  for (long i = 0; i <= n; ++i) {
    const double x = lo + h * static_cast<double>(i);
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    sum += w * kernel(spec, q, x, t) * f(x);
  }
  return h * sum;
}

}  // namespace

TEST_CASE("hermite polynomials") {
  CHECK(hermite(0, 3.7) == 1.0);
  CHECK(hermite(1, 0.5) == doctest::Approx(1.0));
  CHECK(hermite(4, 1.0) == doctest::Approx(-20.0));
  for (int n = 0; n <= 12; ++n)
    for (double x : {-2.3, -0.4, 0.0, 0.9, 3.1})
      CHECK(hermite(n, x) == doctest::Approx(hermite_explicit(n, x)).epsilon(1e-12));
  CHECK(test::error_kind([] { (void)hermite(-1, 0.0); }) == ErrorKind::NegativeIndex);
}

TEST_CASE("oscillator eigenfunctions") {
  const SystemParams params = SystemParams::harmonic();
  CHECK(ho_eigenfunction(params, 0.0, 0) == doctest::Approx(std::pow(kPi, -0.25)));
  CHECK(test::error_kind([&] { (void)ho_eigenfunction(params, 0.0, -2); }) == ErrorKind::NegativeIndex);

  // Orthonormality by trapezoid on a wide fine grid.
  const Grid g(-15.0, 15.0, 3001);
  for (int m = 0; m <= 10; ++m)
    for (int n = m; n <= 10; ++n) {
      double sum = 0.0;
      for (Index j = 0; j < g.n(); ++j) sum += ho_eigenfunction(params, g.point(j), m) * ho_eigenfunction(params, g.point(j), n);
      CHECK(std::abs(sum * g.dq() - (m == n ? 1.0 : 0.0)) < 1e-9);
    }

  // Eigen-residual against the discretised Hamiltonian.
  for (const SystemParams& p : {params, SystemParams::harmonic(2.0, 0.5, 0.7)}) {
    const double length = std::sqrt(p.hbar / (p.mass * *p.omega));
    const Grid h(-12.0 * length, 12.0 * length, 512);
    const DenseOperator ham = hamiltonian(p, h);
    for (int n = 0; n <= 10; ++n) {
      CVector v(h.n());
      for (Index j = 0; j < h.n(); ++j) v[j] = ho_eigenfunction(p, h.point(j), n);
      const double energy = p.hbar * *p.omega * (n + 0.5);
      CHECK((ham.mat * v - energy * v).norm() / v.norm() < 1e-6);
    }
  }
}

TEST_CASE("kernel closed-form values") {
  const cplx prefactor = std::pow(2.0 * kPi, -0.5) * std::exp(-kI * kPi / 4.0);
  CHECK(std::abs(kernel(kFreeQ, 0.7, 0.7, 1.0) - prefactor) < 1e-15);
  CHECK(std::abs(kernel(kHarmonicQ, 0.0, 1.3, kPi / 2.0) - prefactor) < 1e-15);
  CHECK(std::abs(kernel(kHarmonicQ, -0.8, 0.0, kPi / 2.0) - prefactor) < 1e-15);

  // Vanishing frequency approaches the free kernel.
  const KernelSpec slow{Representation::PositionQ, SystemParams::harmonic(1.0, 1e-4)};
  for (double q : {-1.0, 0.2, 1.5})
    for (double x : {-0.5, 0.0, 0.9}) CHECK(std::abs(kernel(slow, q, x, 0.5) - kernel(kFreeQ, q, x, 0.5)) < 1e-8);

  // Free momentum kernel: plane wave times the free phase.
  const KernelSpec free_p{Representation::MomentumP, SystemParams::free(2.0, 0.7)};
  const cplx expected = std::exp(kI * (0.4 * 1.1 - 1.1 * 1.1 * 0.3 / 4.0) / 0.7) / std::sqrt(2.0 * kPi * 0.7);
  CHECK(std::abs(kernel(free_p, 0.4, 1.1, 0.3) - expected) < 1e-14);
}

TEST_CASE("kernel windows") {
  const KernelSpec harmonic_p{Representation::MomentumP, SystemParams::harmonic()};
  CHECK(test::error_kind([] { (void)kernel(kFreeQ, 0.0, 0.0, 0.0); }) == ErrorKind::SingularTime);
  CHECK(test::error_kind([] { (void)kernel(kFreeQ, 0.0, 0.0, -0.5); }) == ErrorKind::SingularTime);
  CHECK(test::error_kind([] { (void)kernel(kHarmonicQ, 0.0, 0.0, kPi); }) == ErrorKind::SingularTime);
  CHECK(test::error_kind([&] { (void)kernel(harmonic_p, 0.0, 0.0, kPi / 2.0); }) == ErrorKind::SingularTime);
  CHECK(in_window(harmonic_p, 0.0));
  CHECK(in_window(kHarmonicQ, 3.0));
  CHECK_FALSE(in_window(kHarmonicQ, 3.2));
  CHECK(in_window({Representation::MomentumP, SystemParams::free()}, 0.0));
}

TEST_CASE("prefactor phase is fixed inside the window") {
  // At the origin the exponent vanishes and only the prefactor remains.
  for (const KernelSpec& spec : {kFreeQ, kHarmonicQ})
    for (int i = 1; i < 314; ++i) CHECK(std::arg(kernel(spec, 0.0, 0.0, 0.01 * i)) == doctest::Approx(-kPi / 4.0));

  // The oscillator momentum kernel picks up -i once cos(wt) turns negative.
  const KernelSpec harmonic_p{Representation::MomentumP, SystemParams::harmonic()};
  CHECK(std::arg(kernel(harmonic_p, 0.0, 0.0, -1.0)) == doctest::Approx(0.0));
  CHECK(std::arg(kernel(harmonic_p, 0.0, 0.0, 1.0)) == doctest::Approx(0.0));
  CHECK(std::arg(kernel(harmonic_p, 0.0, 0.0, 2.5)) == doctest::Approx(-kPi / 2.0));
}

TEST_CASE("kernel quadrature reproduces analytic evolution") {
  // Free packet: closed-form spreading Gaussian.
  for (double t : {1e-3, 0.5}) {
    for (double q : {-1.0, 0.0, 0.8}) {
      const cplx pushed = push(kFreeQ, q, t, unit_gaussian, -12.0, 12.0, std::min(2e-3, 0.05 * t));
      CHECK(std::abs(pushed - spread_gaussian(q, t)) < 1e-9);
    }
  }
  // Oscillator: displaced ground state rotates rigidly.
  for (double t : {0.4, 1.2}) {
    for (double q : {-1.0, 0.5, 2.0}) {
      const auto ground = [](double x) { return std::pow(kPi, -0.25) * std::exp(-0.5 * (x - 1.0) * (x - 1.0)); };
      const cplx pushed = push(kHarmonicQ, q, t, ground, -12.0, 14.0, 2e-3);
      CHECK(std::abs(pushed - coherent_orbit(q, 1.0, t)) < 1e-9);
    }
  }
}

TEST_CASE("small-time limit approaches the delta") {
  // The deviation from the initial packet is first order in t.
  const auto deviation = [](double t) {
    double worst = 0.0;
    for (double q = -4.0; q <= 4.0; q += 1.0) {
      const cplx pushed = push(kFreeQ, q, t, unit_gaussian, -9.0, 9.0, 0.08 * t);
      worst = std::max(worst, std::abs(pushed - unit_gaussian(q)));
    }
    return worst;
  };
  const double at_1e3 = deviation(1e-3);
  const double at_1e4 = deviation(1e-4);
  CHECK(at_1e4 <= 1e-4);
  CHECK(at_1e3 / at_1e4 == doctest::Approx(10.0).epsilon(0.01));
}

TEST_CASE("kernel versus dense evolution") {
  const Grid g(-20.0, 20.0, 512);
  SUBCASE("free") {
    const Propagator prop(SystemParams::free(), g);
    const CheckResult r = kernel_vs_evolution_check(kFreeQ, prop, 0.5, gaussian_packet(g, 0.0, 0.0, 1.0));
    CHECK(r.passed);
    CHECK(r.residual <= 1e-6);
  }
  SUBCASE("oscillator") {
    const Propagator prop(SystemParams::harmonic(), g);
    CHECK(kernel_vs_evolution_check(kHarmonicQ, prop, 0.7, gaussian_packet(g, 0.0, 0.0, 1.0)).passed);
    CHECK(test::error_kind([&] {
            (void)kernel_vs_evolution_check(kHarmonicQ, prop, kPi, gaussian_packet(g, 0.0, 0.0, 1.0));
          }) == ErrorKind::SingularTime);
  }
  SUBCASE("unit-bearing parameters") {
    const SystemParams params = SystemParams::harmonic(2.0, 0.5, 0.7);
    const Propagator prop(params, g);
    const KernelSpec spec{Representation::PositionQ, params};
    CHECK(kernel_vs_evolution_check(spec, prop, 1.1, gaussian_packet(g, 0.0, 0.0, 0.8, 0.7)).passed);
  }
}

TEST_CASE("kernel composition") {
  const std::vector<PointPair> pairs{{0.5, 1.0}, {-1.0, 0.3}, {2.0, -1.5}};
  CHECK(kernel_composition_check(kFreeQ, 0.4, 0.4, pairs).residual <= 1e-5);
  CHECK(kernel_composition_check(kHarmonicQ, 0.3, 0.4, pairs).residual <= 1e-5);
  CHECK(kernel_composition_check(kFreeQ, 0.4, 0.0, pairs).residual == 0.0);
  const KernelSpec odd{Representation::PositionQ, SystemParams::harmonic(2.0, 0.5, 0.7)};
  CHECK(kernel_composition_check(odd, 0.9, 1.3, pairs).passed);
  CHECK(test::error_kind([&] { (void)kernel_composition_check(kHarmonicQ, 2.0, 1.5, pairs); }) ==
        ErrorKind::SingularTime);
}

TEST_CASE("kernels solve the Schrodinger equation") {
  CHECK(kernel_schrodinger_residual(kFreeQ, {1.0, 0.0, 0.8}, 1e-3) <= 1e-5);
  CHECK(kernel_schrodinger_residual(kHarmonicQ, {0.5, -0.3, 0.5}, 1e-3) <= 1e-5);
  const KernelSpec harmonic_p{Representation::MomentumP, SystemParams::harmonic()};
  CHECK(kernel_schrodinger_residual(harmonic_p, {0.5, -0.3, 0.5}, 1e-3) <= 1e-5);

  // Second-order convergence of the central differences.
  for (const KernelSpec& spec : {kFreeQ, kHarmonicQ, harmonic_p}) {
    const double coarse = kernel_schrodinger_residual(spec, {1.0, 0.2, 0.8}, 1e-2);
    const double fine = kernel_schrodinger_residual(spec, {1.0, 0.2, 0.8}, 5e-3);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.02));
  }
}

TEST_CASE("moving momentum states") {
  const SystemParams params = SystemParams::free(2.0, 0.7);
  for (double t : {0.0, 0.6})
    for (double q : {-1.0, 2.0})
      CHECK(std::abs(moving_momentum_state(params, q, 1.3, t)) == doctest::Approx(1.0 / std::sqrt(2.0 * kPi * 0.7)));
  const cplx plane = std::exp(kI * 0.5 * 1.3 / 0.7) / std::sqrt(2.0 * kPi * 0.7);
  CHECK(std::abs(moving_momentum_state(params, 0.5, 1.3, 0.0) - plane) < 1e-15);

  const std::vector<PointPair> pairs{{0.5, 1.0}, {-1.0, -0.5}};
  CHECK(moving_momentum_check(SystemParams::free(), 0.7, pairs).residual <= 1e-6);
  CHECK(moving_momentum_check(params, 0.3, pairs).passed);
  CHECK(test::error_kind([] { (void)moving_momentum_state(SystemParams::harmonic(), 0.0, 1.0, 0.5); }) ==
        ErrorKind::UnsupportedCombination);
}

TEST_CASE("moving number states") {
  const SystemParams params = SystemParams::harmonic();
  CHECK(std::abs(moving_number_state(params, 0.0, 0, 0.0) - std::pow(kPi, -0.25)) < 1e-15);
  for (int n : {0, 3, 7}) {
    const cplx ratio = moving_number_state(params, 0.6, n, 0.9) / moving_number_state(params, 0.6, n, 0.0);
    CHECK(std::abs(ratio - std::exp(kI * (n + 0.5) * 0.9)) < 1e-14);
  }
  const std::vector<double> qs{-1.5, 0.0, 0.7, 2.2};
  for (double t : {0.5, 2.0}) {
    CHECK(moving_number_check(params, t, 10, qs).residual <= 1e-8);
    CHECK(number_orthonormality_check(params, t, 10).residual <= 1e-8);
  }
  const SystemParams odd = SystemParams::harmonic(2.0, 0.5, 0.7);
  CHECK(moving_number_check(odd, 1.4, 10, qs).passed);
  CHECK(test::error_kind([&] { (void)moving_number_state(params, 0.0, -1, 0.3); }) == ErrorKind::NegativeIndex);
}

TEST_CASE("moving coherent states") {
  const SystemParams params = SystemParams::harmonic();
  for (double q : {-1.0, 0.0, 1.7})
    CHECK(std::abs(moving_coherent_state(params, q, 0.0, 0.8) - moving_number_state(params, q, 0, 0.8)) < 1e-15);

  // t = 0, real z: truncated number sum built here from the explicit Hermite formula.
  for (double z : {0.5, 1.5}) {
    for (double q : {-1.0, 0.3, 2.0}) {
      cplx sum = 0.0;
      for (int n = 0; n <= 60; ++n) {
        const double psi = std::pow(kPi, -0.25) * std::exp(-0.5 * q * q) * std::hermite(n, q) /
                           std::sqrt(std::pow(2.0, n) * std::tgamma(n + 1.0));
        sum += psi * std::pow(z, n) * std::exp(-0.5 * z * z) / std::sqrt(std::tgamma(n + 1.0));
      }
      CHECK(std::abs(moving_coherent_state(params, q, z, 0.0) - sum) < 1e-8);
    }
  }

  const std::vector<double> qs{-1.5, 0.0, 0.7, 2.2};
  const std::vector<cplx> zs{2.0 * std::exp(kI * 0.4), cplx(0.0, 2.0), 1.0};
  const CheckResult r = moving_coherent_check(params, 0.6, zs, qs);
  CHECK(r.passed);
  CHECK(moving_coherent_check(SystemParams::harmonic(2.0, 0.5, 0.7), 1.1, zs, qs).passed);

  const auto [value, cutoff] = coherent_number_sum(params, 0.3, 2.0, 0.6);
  CHECK(cutoff > 4);
  CHECK(cutoff < 80);
  CHECK(std::abs(value - moving_coherent_state(params, 0.3, 2.0, 0.6)) < 1e-12);
}

TEST_CASE("Fourier duality between position and momentum kernels") {
  const std::vector<PointPair> free_pair{{0.5, 1.0}};
  CHECK(fourier_duality_check(SystemParams::free(), 0.7, free_pair).residual <= 1e-6);
  const std::vector<PointPair> pairs{{0.5, 1.0}, {-0.8, -0.4}};
  CHECK(fourier_duality_check(SystemParams::harmonic(), 0.5, pairs).residual <= 1e-6);
  CHECK(fourier_duality_check(SystemParams::harmonic(2.0, 0.5, 0.7), 1.2, pairs).passed);

  const KernelSpec harmonic_p{Representation::MomentumP, SystemParams::harmonic()};
  for (double q : {0.3, 1.1, 2.5}) CHECK(std::abs(kernel(harmonic_p, q, 0.0, 0.8) - kernel(harmonic_p, -q, 0.0, 0.8)) < 1e-15);
}

TEST_CASE("kernels preserve inner products") {
  CHECK(kernel_unitarity_check(kFreeQ, 0.5).passed);
  CHECK(kernel_unitarity_check(kHarmonicQ, 1.2).passed);
  CHECK(kernel_unitarity_check({Representation::MomentumP, SystemParams::harmonic()}, 0.9).passed);
  CHECK(kernel_unitarity_check({Representation::MomentumP, SystemParams::free(2.0, 0.7)}, 0.4).passed);
}

TEST_CASE("tapered rule integrates smooth functions") {
  const TaperedRule plain(0.0, 3.0, 0.0, 0.01);
  CHECK(std::abs(plain.integrate([](double x) { return cplx(x * x); }) - 18.0) < 1e-3);
  const TaperedRule wide(1.0, 30.0, 3.0, 0.02);
  const cplx gauss = wide.integrate([](double x) { return cplx(std::exp(-(x - 1.0) * (x - 1.0))); });
  CHECK(std::abs(gauss - std::sqrt(kPi)) < 1e-12);
}

TEST_CASE("property: Schrodinger residual at random points") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-0.5, 0.5);
  std::uniform_real_distribution<double> time(0.5, 1.0);
  for (const SystemParams& params : {SystemParams::free(), SystemParams::harmonic(), SystemParams::harmonic(2.0, 0.5, 0.7)}) {
    const double w = params.system == System::Free ? 1.0 : *params.omega;
    const double length = std::sqrt(params.hbar / (params.mass * w));
    for (Representation rep : {Representation::PositionQ, Representation::MomentumP}) {
      const KernelSpec spec{rep, params};
      const double scale = rep == Representation::PositionQ ? length : params.hbar / length;
      for (int i = 0; i < 20; ++i) {
        const SpaceTimePoint p{coord(rng) * length, coord(rng) * scale, time(rng) / w};
        CHECK(kernel_schrodinger_residual(spec, p, 1e-3) <= 1e-5);
      }
    }
  }
}
