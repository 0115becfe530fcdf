#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "qmframe/hamilton_jacobi.hpp"
#include "qmframe/kernels.hpp"
#include "test_support.hpp"

using namespace qmframe;
using namespace qmframe::hj;

namespace {

std::vector<GeneratingFunction> all_generating(const SystemParams& free, const SystemParams& harmonic) {
  return {GeneratingFunction(GenRep::qQ, free), GeneratingFunction(GenRep::qP, free),
          GeneratingFunction(GenRep::qQ, harmonic), GeneratingFunction(GenRep::qP, harmonic)};
}

std::string metadata(const CheckResult& r, const std::string& key) {
  for (const auto& [k, v] : r.metadata)
    if (k == key) return v;
  return {};
}

}  // namespace

TEST_CASE("generating function values") {
  const SystemParams free = SystemParams::free();
  CHECK(GeneratingFunction(GenRep::qQ, free).value(2.0, 1.0, 0.5) == doctest::Approx(1.0));
  CHECK(GeneratingFunction(GenRep::qP, free).value(1.0, 2.0, 0.5) == doctest::Approx(1.0));
  const GeneratingFunction ho(GenRep::qQ, SystemParams::harmonic());
  for (double q : {-1.0, 0.5})
    for (double x : {0.3, 2.0}) CHECK(ho.value(q, x, kPi / 2.0) == doctest::Approx(-q * x));

  CHECK(test::error_kind([&] { (void)generating(System::Harmonic, GenRep::qQ, free); }) ==
        ErrorKind::UnsupportedCombination);
  CHECK(test::error_kind([&] { (void)GeneratingFunction(GenRep::qQ, free).evaluate(0.0, 0.0, 0.0); }) ==
        ErrorKind::SingularTime);
  CHECK(test::error_kind([&] { (void)ho.evaluate(0.0, 0.0, kPi); }) == ErrorKind::SingularTime);
  CHECK(test::error_kind([] {
          (void)GeneratingFunction(GenRep::qP, SystemParams::harmonic()).evaluate(0.0, 0.0, kPi / 2.0);
        }) == ErrorKind::SingularTime);
}

TEST_CASE("analytic partials match central differences") {
  const double h = 1e-4;
  for (const auto& w : all_generating(SystemParams::free(2.0, 0.7), SystemParams::harmonic(2.0, 0.5, 0.7))) {
    for (const Sample s : {Sample{0.4, -0.3, 0.9}, Sample{-1.2, 0.8, 1.4}}) {
      const Partials d = w.evaluate(s.q, s.x, s.t);
      const auto f = [&](double q, double x, double t) { return w.value(q, x, t); };
      const double dq = (f(s.q + h, s.x, s.t) - f(s.q - h, s.x, s.t)) / (2 * h);
      const double dx = (f(s.q, s.x + h, s.t) - f(s.q, s.x - h, s.t)) / (2 * h);
      const double dt = (f(s.q, s.x, s.t + h) - f(s.q, s.x, s.t - h)) / (2 * h);
      const double dqq = (f(s.q + h, s.x, s.t) - 2 * d.value + f(s.q - h, s.x, s.t)) / (h * h);
      const double dxx = (f(s.q, s.x + h, s.t) - 2 * d.value + f(s.q, s.x - h, s.t)) / (h * h);
      const double dqx =
          (f(s.q + h, s.x + h, s.t) - f(s.q + h, s.x - h, s.t) - f(s.q - h, s.x + h, s.t) + f(s.q - h, s.x - h, s.t)) /
          (4 * h * h);
      const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(b)); };
      CHECK(close(dq, d.dq));
      CHECK(close(dx, d.dx));
      CHECK(close(dt, d.dt));
      CHECK(close(dqq, d.dqq));
      CHECK(close(dxx, d.dxx));
      CHECK(close(dqx, d.dqx));
    }
  }
}

TEST_CASE("Hamilton-Jacobi residual vanishes") {
  CHECK(std::abs(hj_residual(GeneratingFunction(GenRep::qQ, SystemParams::free()), 2.0, 1.0, 0.5)) <= 1e-12);
  CHECK(std::abs(hj_residual(GeneratingFunction(GenRep::qQ, SystemParams::harmonic()), 0.5, -0.2, 0.8)) <= 1e-12);

  std::mt19937_64 rng(20240611);
  for (const auto& w : all_generating(SystemParams::free(), SystemParams::harmonic())) {
    const auto samples = random_samples(w, 1000, rng);
    CHECK(samples.size() == 1000);
    for (const Sample& s : samples) CHECK(w.in_domain(s.t));
    CHECK(hj_residual_check(w, samples).residual <= 1e-12);
  }
  for (const auto& w : all_generating(SystemParams::free(2.0, 0.7), SystemParams::harmonic(2.0, 0.5, 0.7)))
    CHECK(hj_residual_check(w, random_samples(w, 200, rng)).passed);
}

TEST_CASE("F function") {
  CHECK(f_function(GeneratingFunction(GenRep::qQ, SystemParams::free()), 2.0) == doctest::Approx(0.25));
  for (double t : {-1.0, 0.3, 2.0}) CHECK(f_function(GeneratingFunction(GenRep::qP, SystemParams::free()), t) == 0.0);
  CHECK(std::abs(f_function(GeneratingFunction(GenRep::qQ, SystemParams::harmonic()), kPi / 2.0)) < 1e-15);

  // F equals (1/2m) W_qq by finite differences and is the derivative of its integral.
  const double h = 1e-3;
  for (const auto& w : all_generating(SystemParams::free(2.0, 0.7), SystemParams::harmonic(2.0, 0.5, 0.7))) {
    const QuantumAction action = quantum_action(w);
    for (double t : {0.6, 1.1}) {
      const double wqq = (w.value(0.7 + h, 0.2, t) - 2 * w.value(0.7, 0.2, t) + w.value(0.7 - h, 0.2, t)) / (h * h);
      CHECK(std::abs(action.f(t) - wqq / (2 * w.params().mass)) <= 1e-8);
      const cplx slope = (action.f_integral(t + h) - action.f_integral(t - h)) / (2 * h);
      CHECK(std::abs(slope - action.f(t)) <= 1e-6);
    }
  }
}

TEST_CASE("semiclassical wavefunction reproduces the kernels") {
  const SystemParams free = SystemParams::free();
  const QuantumAction s = quantum_action(GeneratingFunction(GenRep::qQ, free));
  const kernels::KernelSpec spec{kernels::Representation::PositionQ, free};
  for (double t : {0.4, 1.3}) {
    const cplx psi = semiclassical_wavefunction(s, 0.6, -0.2, t);
    CHECK(std::abs(psi / std::sqrt(2.0 * kPi * kI) - kernel(spec, 0.6, -0.2, t)) < 1e-13);
  }

  std::mt19937_64 rng(5);
  for (const auto& w : all_generating(SystemParams::free(2.0, 0.7), SystemParams::harmonic(2.0, 0.5, 0.7))) {
    const auto samples = pde_samples(w, 50, rng);
    const CheckResult r = kernel_proportionality_check(quantum_action(w), samples);
    CHECK(r.passed);
    CHECK_FALSE(metadata(r, "ratio_re").empty());
  }
}

TEST_CASE("exp(iS/hbar) solves the Schrodinger equation") {
  const QuantumAction free_qq = quantum_action(GeneratingFunction(GenRep::qQ, SystemParams::free()));
  CHECK(se_residual(free_qq, {1.0, 0.0, 0.8}, 1e-3) <= 1e-5);

  std::mt19937_64 rng(3);
  for (const auto& w : all_generating(SystemParams::free(), SystemParams::harmonic())) {
    const QuantumAction action = quantum_action(w);
    const auto samples = pde_samples(w, 100, rng);
    CHECK(se_residual_check(action, samples, 1e-3).residual <= 1e-5);
    const double coarse = se_residual_check(action, samples, 1e-2).residual;
    const double fine = se_residual_check(action, samples, 5e-3).residual;
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.02));
  }
}

TEST_CASE("Legendre transform between the two generating functions") {
  const Sample free_points[] = {{0.3, 1.2, 0.7}, {-2.0, -0.4, 1.9}};
  CHECK(legendre_transform_check(SystemParams::free(), free_points).residual <= 1e-12);
  const Sample ho_points[] = {{0.4, 0.9, 0.6}};
  CHECK(legendre_transform_check(SystemParams::harmonic(), ho_points).residual <= 1e-10);
  const Sample odd_points[] = {{0.4, 0.9, 0.6}, {-1.1, 0.2, 2.0}};
  CHECK(legendre_transform_check(SystemParams::harmonic(2.0, 0.5, 0.7), odd_points).passed);
  const Sample flat[] = {{0.4, 0.9, kPi / 2.0}};
  CHECK(test::error_kind([&] { (void)legendre_transform_check(SystemParams::harmonic(), flat); }) ==
        ErrorKind::DegenerateHessian);
}

TEST_CASE("generating functions reproduce the frame coordinates") {
  const SystemParams free = SystemParams::free();
  const CanonicalImage a = canonical_image(GeneratingFunction(GenRep::qQ, free), 1.0, 2.0, 0.5);
  CHECK(std::abs(a.Q) < 1e-14);
  CHECK(a.P == doctest::Approx(2.0));

  const SystemParams ho = SystemParams::harmonic();
  const CanonicalImage b = canonical_image(GeneratingFunction(GenRep::qQ, ho), 1.0, 0.0, kPi / 2.0);
  CHECK(std::abs(b.Q) < 1e-14);
  CHECK(b.P == doctest::Approx(1.0));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  std::uniform_real_distribution<double> time(0.2, 1.25);
  for (const SystemParams& params : {free, ho, SystemParams::harmonic(2.0, 0.5, 0.7)}) {
    std::vector<Sample> samples;
    for (int i = 0; i < 100; ++i) samples.push_back({coord(rng), coord(rng), time(rng)});
    CHECK(canonical_derivative_check(params, samples).residual <= 1e-10);
  }
}

TEST_CASE("classical trajectories") {
  const SystemParams free = SystemParams::free();
  const PhasePoint end = classical_trajectory(free, 0.0, 1.0, 2.0);
  CHECK(end.q == doctest::Approx(2.0));
  CHECK(end.p == doctest::Approx(1.0));
  const CanonicalImage frame = frame_coordinates(free, end.q, end.p, end.t);
  CHECK(std::abs(frame.Q) < 1e-15);

  const SystemParams ho = SystemParams::harmonic();
  const auto orbit = integrate_trajectory(ho, 1.0, 0.0, 20.0);
  CHECK(orbit.back().t == doctest::Approx(20.0));
  for (const PhasePoint& p : orbit) {
    const PhasePoint exact = classical_trajectory(ho, 1.0, 0.0, p.t);
    CHECK(std::abs(p.q - exact.q) < 1e-9);
    CHECK(std::abs(p.p - exact.p) < 1e-9);
    const CanonicalImage c = frame_coordinates(ho, exact.q, exact.p, exact.t);
    CHECK(std::abs(c.Q - 1.0) < 1e-10);
    CHECK(std::abs(c.P) < 1e-10);
  }
  CHECK(frame_constancy_check(ho, orbit).residual <= 1e-8);
  CHECK(energy_conservation_check(ho, orbit).residual <= 1e-10);

  const auto odd = integrate_trajectory(SystemParams::harmonic(2.0, 0.5, 0.7), -0.5, 0.8, 15.0);
  CHECK(frame_constancy_check(SystemParams::harmonic(2.0, 0.5, 0.7), odd).passed);
}

TEST_CASE("action-angle variables are canonical") {
  const SystemParams ho = SystemParams::harmonic();
  CHECK(std::abs(action_angle_bracket(ho, 1.0, 1.0, 1e-5) - 1.0) <= 1e-6);
  CHECK(action_angle(ho, 1.0, 1.0, 0.0).P == doctest::Approx(1.0));

  // Stencil straddling the arctangent cut (p < 0, q near 0).
  CHECK(std::abs(action_angle_bracket(ho, 1e-6, -0.7, 1e-5) - 1.0) <= 1e-6);

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  std::vector<PhasePoint> points;
  while (points.size() < 100) {
    const double q = coord(rng);
    const double p = coord(rng);
    if (std::abs(p) >= 0.1) points.push_back({q, p, 0.0});
  }
  CHECK(action_angle_check(ho, points).residual <= 1e-6);

  const std::vector<PhasePoint> near_cut{{1.0, 0.01, 0.0}, {1.0, 1.0, 0.0}};
  const CheckResult r = action_angle_check(ho, near_cut);
  CHECK(metadata(r, "skipped_p_near_zero") == "1");

  const auto orbit = integrate_trajectory(ho, 1.0, 0.0, 20.0);
  CHECK(action_angle_orbit_check(ho, orbit).residual <= 1e-8);
  for (const PhasePoint& p : orbit) CHECK(action_angle(ho, p.q, p.p, p.t).P == doctest::Approx(0.5).epsilon(1e-10));

  CHECK(test::error_kind([] { (void)action_angle(SystemParams::free(), 1.0, 1.0, 0.0); }) ==
        ErrorKind::UnsupportedCombination);
}
