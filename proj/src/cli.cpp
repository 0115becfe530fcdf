#include "qmframe/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#include "qmframe/evolution.hpp"
#include "qmframe/hamilton_jacobi.hpp"
#include "qmframe/kernels.hpp"

namespace qmframe::cli {

using nlohmann::json;

SystemParams RunConfig::params() const {
  SystemParams p = system == System::Free ? SystemParams::free(mass, hbar) : SystemParams::harmonic(mass, omega, hbar);
  p.validate();
  return p;
}

Grid RunConfig::grid() const { return Grid(q_min, q_max, n); }

// Shared, lazily built state for one verify run.
class RunContext {
 public:
  RunContext(const RunConfig& config, std::ostream& log) : config_(config), params_(config.params()), log_(log) {}

  const RunConfig& config() const { return config_; }
  const SystemParams& params() const { return params_; }
  std::ostream& log() { return log_; }

  // Natural units: length l = sqrt(hbar / m w), momentum hbar / l, time 1 / w
  // (w = 1 for the free particle).
  double freq() const { return params_.system == System::Harmonic ? params_.frequency() : 1.0; }
  double length() const { return std::sqrt(params_.hbar / (params_.mass * freq())); }
  double momentum() const { return params_.hbar / length(); }

  std::shared_ptr<const Propagator> user_propagator() {
    if (!user_) user_ = std::make_shared<const Propagator>(params_, config_.grid());
    return user_;
  }
  std::shared_ptr<const Propagator> op_propagator() {
    if (!op_) op_ = std::make_shared<const Propagator>(params_, evolution::balanced_grid(params_, config_.op_n));
    return op_;
  }
  std::shared_ptr<const Propagator> fd_propagator() {
    if (!fd_) fd_ = std::make_shared<const Propagator>(params_, evolution::balanced_grid(params_, config_.fd_n));
    return fd_;
  }
  const evolution::MovingFrame& op_frame(double t) {
    auto it = frames_.find(t);
    if (it == frames_.end()) it = frames_.emplace(t, evolution::make_frame(op_propagator(), t)).first;
    return it->second;
  }

  // Independent stream per check so results do not depend on which other
  // checks ran.
  std::mt19937_64 rng(std::string_view check) const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : check) h = (h ^ c) * 1099511628211ull;
    return std::mt19937_64(config_.seed ^ h);
  }

 private:
  const RunConfig& config_;
  SystemParams params_;
  std::ostream& log_;
  std::shared_ptr<const Propagator> user_;
  std::shared_ptr<const Propagator> op_;
  std::shared_ptr<const Propagator> fd_;
  std::map<double, evolution::MovingFrame> frames_;
};

namespace {

using kernels::KernelSpec;
using kernels::Representation;

bool any_system(System) { return true; }
bool free_only(System s) { return s == System::Free; }
bool harmonic_only(System s) { return s == System::Harmonic; }

KernelSpec position_spec(const RunContext& ctx) { return {Representation::PositionQ, ctx.params()}; }
KernelSpec momentum_spec(const RunContext& ctx) { return {Representation::MomentumP, ctx.params()}; }

CheckResult combine(CheckResult a, const CheckResult& b, const std::string& prefix) {
  // Residuals are compared relative to their own tolerances; the reported
  // residual is the worse ratio scaled back to a's tolerance.
  for (const auto& [k, v] : b.metadata) a.with(prefix + k, v);
  a.with(prefix + "residual", b.residual).with(prefix + "tolerance", b.tolerance);
  if (b.skipped) return a;
  const double ratio = b.residual / b.tolerance;
  if (!(ratio <= a.residual / a.tolerance)) a.residual = ratio * a.tolerance;
  a.passed = a.passed && b.passed;
  return a;
}

// Schrodinger-residual samples shrink with the distance to the nearest
// singular time so the central differences stay in their asymptotic range.
double pde_scale(const RunContext& ctx, Representation rep, double t) {
  const double wt = ctx.freq() * t;
  if (ctx.params().system == System::Free) return rep == Representation::PositionQ ? std::min(1.0, wt) : 1.0;
  return std::min(1.0, rep == Representation::PositionQ ? std::abs(std::sin(wt)) : std::abs(std::cos(wt)));
}

CheckResult kernel_schrodinger(RunContext& ctx, double t) {
  CheckResult out;
  bool first = true;
  for (Representation rep : {Representation::PositionQ, Representation::MomentumP}) {
    const KernelSpec spec{rep, ctx.params()};
    const double tau = pde_scale(ctx, rep, t);
    const double d = 0.5 * std::sqrt(tau);
    const double xs = rep == Representation::PositionQ ? ctx.length() : ctx.momentum();
    const std::vector<kernels::SpaceTimePoint> pts{{d * ctx.length(), 0.0, t}, {0.5 * d * ctx.length(), -0.3 * d * xs, t}};
    CheckResult r = kernels::kernel_schrodinger_check(spec, pts, 1e-3 * tau);
    r.with("representation", rep == Representation::PositionQ ? "position" : "momentum");
    if (first) {
      out = r;
      first = false;
    } else {
      out = combine(out, r, "momentum_");
    }
  }
  return out;
}

std::vector<hj::Sample> legendre_samples(const RunContext& ctx, std::mt19937_64& rng, std::size_t count) {
  // Times inside both domains and away from the vanishing d^2W/dQ^2 at wt = pi/2.
  std::uniform_real_distribution<double> unit(-3.0, 3.0);
  const double w = ctx.freq();
  std::uniform_real_distribution<double> time(ctx.params().system == System::Free ? 0.2 : 0.1 / w,
                                              ctx.params().system == System::Free ? 2.0 : 1.25 / w);
  std::vector<hj::Sample> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double q = unit(rng) * ctx.length();
    const double x = unit(rng) * ctx.momentum();
    out.push_back({q, x, time(rng)});
  }
  return out;
}

std::vector<std::pair<double, double>> initial_conditions(const RunContext& ctx, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  std::vector<std::pair<double, double>> out{{ctx.length(), 0.0}, {0.0, ctx.momentum()}};
  for (int i = 0; i < 3; ++i) {
    const double q = unit(rng) * ctx.length();
    out.emplace_back(q, unit(rng) * ctx.momentum());
  }
  return out;
}

std::vector<CheckInfo> build_registry() {
  std::vector<CheckInfo> r;
  const auto add = [&r](std::string name, std::string module, std::string anchor, bool timed,
                        std::function<bool(System)> applies, std::function<CheckResult(RunContext&, double)> run) {
    r.push_back({std::move(name), std::move(module), std::move(anchor), timed, std::move(applies), std::move(run)});
  };

  // ---------------------------------------------------------------- evolution
  add("closed_form_operators", "evolution",
      "Q(t) = T q T^dag reduces to q - (t/m) p (free) and q cos wt - (p/mw) sin wt (oscillator)", true, any_system,
      [](RunContext& ctx, double t) { return evolution::closed_form_operator_check(ctx.op_frame(t)); });
  add("commutator", "evolution", "[Q(t), P(t)] = i hbar", true, any_system, [](RunContext& ctx, double t) {
    const auto& frame = ctx.op_frame(t);
    const auto states = evolution::interior_test_packets(frame.grid, ctx.params().hbar);
    return evolution::commutator_residual(frame, states);
  });
  add("moving_base_eigen", "evolution", "Q(t) |Q;t> = Q |Q;t> with |Q;t> = T(t) |Q>", true, any_system,
      [](RunContext& ctx, double t) {
        std::vector<double> qs;
        for (int i = 0; i < 10; ++i) qs.push_back((-2.25 + 0.5 * i) * ctx.length());
        return evolution::moving_base_eigen_check(ctx.op_frame(t), qs);
      });
  add("evolution_unitarity", "evolution", "T(t) = exp(-iHt/hbar) is unitary and T(t) T(t) = T(2t)", true, any_system,
      [](RunContext& ctx, double t) {
        return combine(evolution::unitarity_check(ctx.op_frame(t)),
                       evolution::group_law_check(*ctx.op_propagator(), t, t), "group_law_");
      });
  add("heisenberg_duality", "evolution", "T^dag(t) q T(t) = Q(-t): the frame moves opposite to Heisenberg operators",
      true, any_system,
      [](RunContext& ctx, double t) { return evolution::heisenberg_duality_check(*ctx.op_propagator(), t); });
  add("transformed_hamiltonian", "evolution", "K = T^dag H T + i hbar (dT^dag/dt) T = 0 (analytic derivative)", true,
      any_system, [](RunContext& ctx, double t) {
        return evolution::transformed_hamiltonian_residual(*ctx.op_propagator(), t, evolution::AnalyticDerivative{});
      });
  add("transformed_hamiltonian_fd", "evolution",
      "K = T^dag H T + i hbar (dT^dag/dt) T = 0 (central difference, dt = 1e-4)", true, any_system,
      [](RunContext& ctx, double t) {
        const auto& prop = *ctx.fd_propagator();
        CheckResult r = evolution::transformed_hamiltonian_residual(prop, t, evolution::FiniteDifference{1e-4});
        const CheckResult coarse =
            evolution::transformed_hamiltonian_residual(prop, t, evolution::FiniteDifference{2e-4});
        r.with("refinement_ratio", coarse.residual / r.residual);
        return r;
      });
  add("time_independence", "evolution", "Psi(Q,t) = <Q;t|psi;t> does not depend on t", true, any_system,
      [](RunContext& ctx, double t) {
        const auto prop = ctx.op_propagator();
        const auto packets = evolution::interior_test_packets(prop->grid(), ctx.params().hbar);
        const double times[] = {t};
        return evolution::time_independence_check(prop, packets[1], times);
      });

  // ---------------------------------------------------------------- kernels
  add("kernel_vs_evolution", "kernels", "<q|Q;t> = <q|T(t)|Q> is the Feynman propagator", true, any_system,
      [](RunContext& ctx, double t) {
        const auto prop = ctx.user_propagator();
        const Grid& g = prop->grid();
        const double center = 0.5 * (g.q_min() + g.q_max());
        const WaveFunction packet = gaussian_packet(g, center, 0.0, ctx.length(), ctx.params().hbar);
        return kernels::kernel_vs_evolution_check(position_spec(ctx), *prop, t, packet);
      });
  add("kernel_composition", "kernels", "int dx K(q,x;t/2) K(x,Q;t/2) = K(q,Q;t)", true, any_system,
      [](RunContext& ctx, double t) {
        const double l = ctx.length();
        const std::vector<kernels::PointPair> pairs{{0.5 * l, 1.0 * l}, {-1.0 * l, 0.3 * l}, {2.0 * l, -1.5 * l}};
        return kernels::kernel_composition_check(position_spec(ctx), 0.5 * t, 0.5 * t, pairs);
      });
  add("kernel_schrodinger", "kernels", "i hbar dK/dt = H K for <q|Q;t> and <q|P;t>", true, any_system,
      kernel_schrodinger);
  add("fourier_duality", "kernels", "<q|P;t> = int dQ <q|Q;t> (2 pi hbar)^(-1/2) exp(iPQ/hbar)", true, any_system,
      [](RunContext& ctx, double t) {
        const std::vector<kernels::PointPair> pairs{{0.5 * ctx.length(), 1.0 * ctx.momentum()},
                                                    {-0.8 * ctx.length(), -0.4 * ctx.momentum()}};
        return kernels::fourier_duality_check(ctx.params(), t, pairs);
      });
  add("kernel_unitarity", "kernels", "int dq conj(<q|Q;t>) <q|Q';t> = delta(Q - Q')", true, any_system,
      [](RunContext& ctx, double t) { return kernels::kernel_unitarity_check(position_spec(ctx), t); });
  add("kernel_unitarity_momentum", "kernels", "int dq conj(<q|P;t>) <q|P';t> = delta(P - P')", true, any_system,
      [](RunContext& ctx, double t) { return kernels::kernel_unitarity_check(momentum_spec(ctx), t); });
  add("moving_momentum", "kernels", "<Q;t|p> = (2 pi hbar)^(-1/2) exp(iQp/hbar + i p^2 t / 2m hbar)", true, free_only,
      [](RunContext& ctx, double t) {
        const std::vector<kernels::PointPair> pairs{{0.5 * ctx.length(), ctx.momentum()},
                                                    {-1.0 * ctx.length(), -0.5 * ctx.momentum()}};
        return kernels::moving_momentum_check(ctx.params(), t, pairs);
      });
  add("moving_number", "kernels", "<Q;t|n> = <Q|n> exp(i(n + 1/2) wt), orthonormal in Q", true, harmonic_only,
      [](RunContext& ctx, double t) {
        const double l = ctx.length();
        const std::vector<double> qs{-1.5 * l, 0.0, 0.7 * l, 2.2 * l};
        return combine(kernels::moving_number_check(ctx.params(), t, 10, qs),
                       kernels::number_orthonormality_check(ctx.params(), t, 10), "orthonormality_");
      });
  add("moving_coherent", "kernels", "<Q;t|z> = sum_n <Q;t|n> <n|z> for a|z> = z|z>", true, harmonic_only,
      [](RunContext& ctx, double t) {
        const double l = ctx.length();
        const std::vector<double> qs{-1.5 * l, 0.0, 0.7 * l, 2.2 * l};
        const std::vector<cplx> zs{0.0, 0.5, cplx(1.0, -0.5), 2.0 * std::exp(kI * 1.0)};
        return kernels::moving_coherent_check(ctx.params(), t, zs, qs);
      });

  // ---------------------------------------------------------------- hamilton_jacobi
  add("hj_residual", "hamilton_jacobi", "(1/2m)(dW/dq)^2 + V + dW/dt = 0 for W(q,Q,t) and W(q,P,t)", false,
      any_system, [](RunContext& ctx, double) {
        auto rng = ctx.rng("hj_residual");
        CheckResult out;
        for (hj::GenRep rep : {hj::GenRep::qQ, hj::GenRep::qP}) {
          const hj::GeneratingFunction w(rep, ctx.params());
          const auto samples = hj::random_samples(w, 1000, rng);
          const CheckResult r = hj::hj_residual_check(w, samples);
          out = rep == hj::GenRep::qQ ? r : combine(out, r, "qP_");
        }
        return out;
      });
  add("action_schrodinger", "hamilton_jacobi", "psi = exp(iS/hbar) with S = W + i hbar int F dt solves i hbar psi_t = H psi",
      false, any_system, [](RunContext& ctx, double) {
        auto rng = ctx.rng("action_schrodinger");
        CheckResult out;
        for (hj::GenRep rep : {hj::GenRep::qQ, hj::GenRep::qP}) {
          const hj::GeneratingFunction w(rep, ctx.params());
          const auto action = hj::quantum_action(w);
          const auto samples = hj::pde_samples(w, 100, rng);
          CheckResult r = hj::se_residual_check(action, samples, 1e-3);
          const double coarse = hj::se_residual_check(action, samples, 1e-2).residual;
          const double fine = hj::se_residual_check(action, samples, 5e-3).residual;
          r.with("refinement_ratio", coarse / fine);
          out = rep == hj::GenRep::qQ ? r : combine(out, r, "qP_");
        }
        return out;
      });
  add("action_kernel_proportionality", "hamilton_jacobi",
      "exp(iS/hbar) equals the kernel up to a constant factor", false, any_system, [](RunContext& ctx, double) {
        auto rng = ctx.rng("action_kernel_proportionality");
        CheckResult out;
        for (hj::GenRep rep : {hj::GenRep::qQ, hj::GenRep::qP}) {
          const hj::GeneratingFunction w(rep, ctx.params());
          const auto samples = hj::pde_samples(w, 100, rng);
          const CheckResult r = hj::kernel_proportionality_check(hj::quantum_action(w), samples);
          out = rep == hj::GenRep::qQ ? r : combine(out, r, "qP_");
        }
        return out;
      });
  add("legendre_transform", "hamilton_jacobi", "W(q,P,t) = W(q,Q,t) + QP with P = -dW/dQ", false, any_system,
      [](RunContext& ctx, double) {
        auto rng = ctx.rng("legendre_transform");
        return hj::legendre_transform_check(ctx.params(), legendre_samples(ctx, rng, 100));
      });
  add("canonical_derivative", "hamilton_jacobi", "p = dW/dq, P = -dW/dQ reproduce the frame's Q(t) and P(t)", false,
      any_system, [](RunContext& ctx, double) {
        auto rng = ctx.rng("canonical_derivative");
        return hj::canonical_derivative_check(ctx.params(), legendre_samples(ctx, rng, 100));
      });
  add("frame_constancy", "hamilton_jacobi", "Q and P of the frame are constants of the classical motion", false,
      any_system, [](RunContext& ctx, double) {
        auto rng = ctx.rng("frame_constancy");
        double worst = 0.0;
        const double t_end = 10.0 / ctx.freq();
        for (const auto& [q0, p0] : initial_conditions(ctx, rng)) {
          const auto traj = hj::integrate_trajectory(ctx.params(), q0, p0, t_end);
          worst = std::max(worst, hj::frame_constancy_check(ctx.params(), traj).residual);
        }
        return make_result(worst, 1e-8).with("integrator", "rk4").with("step", 1e-3).with("t_end", t_end);
      });
  add("energy_conservation", "hamilton_jacobi", "H = p^2/2m + V is conserved along integrated orbits", false,
      any_system, [](RunContext& ctx, double) {
        auto rng = ctx.rng("energy_conservation");
        double worst = 0.0;
        for (const auto& [q0, p0] : initial_conditions(ctx, rng)) {
          const auto traj = hj::integrate_trajectory(ctx.params(), q0, p0, 10.0 / ctx.freq());
          worst = std::max(worst, hj::energy_conservation_check(ctx.params(), traj).residual);
        }
        return make_result(worst, 1e-10);
      });
  add("action_angle_bracket", "hamilton_jacobi",
      "{Q, P} = 1 for Q = atan(mwq/p)/w - t, P = p^2/2m + m w^2 q^2/2", false, harmonic_only,
      [](RunContext& ctx, double) {
        auto rng = ctx.rng("action_angle_bracket");
        std::uniform_real_distribution<double> unit(-3.0, 3.0);
        std::vector<hj::PhasePoint> pts;
        while (pts.size() < 100) {
          const double q = unit(rng) * ctx.length();
          const double p = unit(rng) * ctx.momentum();
          if (std::abs(p) >= 0.1 * ctx.momentum()) pts.push_back({q, p, 0.0});
        }
        return hj::action_angle_check(ctx.params(), pts, 1e-5, 1e-6, 0.1 * ctx.momentum());
      });
  add("action_angle_orbit", "hamilton_jacobi", "the action-angle pair is constant along integrated orbits", false,
      harmonic_only, [](RunContext& ctx, double) {
        auto rng = ctx.rng("action_angle_orbit");
        double worst = 0.0;
        for (const auto& [q0, p0] : initial_conditions(ctx, rng)) {
          const auto traj = hj::integrate_trajectory(ctx.params(), q0, p0, 10.0 / ctx.freq());
          worst = std::max(worst, hj::action_angle_orbit_check(ctx.params(), traj).residual);
        }
        return make_result(worst, 1e-8).with("integrator", "rk4").with("step", 1e-3);
      });

  std::sort(r.begin(), r.end(), [](const CheckInfo& a, const CheckInfo& b) { return a.name < b.name; });
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fmt(double v) { return format_double(v); }

std::vector<double> parse_list(const std::string& text, std::string_view what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used == 0 || used != item.size())
      throw Error(ErrorKind::ConfigParse, "cannot read " + std::string(what) + " entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::ConfigParse, std::string(what) + " is empty");
  return out;
}

std::vector<std::string> parse_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  if (out.empty()) throw Error(ErrorKind::ConfigParse, "checks list is empty");
  return out;
}

json params_json(const SystemParams& p) {
  json j{{"m", p.mass}, {"hbar", p.hbar}};
  j["omega"] = p.omega ? json(*p.omega) : json(nullptr);
  return j;
}

}  // namespace

const std::vector<CheckInfo>& registry() {
  static const std::vector<CheckInfo> r = build_registry();
  return r;
}

std::vector<const CheckInfo*> list_checks(std::string_view module) {
  std::vector<const CheckInfo*> out;
  for (const CheckInfo& c : registry())
    if (module.empty() || c.module == module) out.push_back(&c);
  return out;
}

std::vector<const CheckInfo*> select_checks(const RunConfig& config) {
  std::vector<const CheckInfo*> out;
  for (const std::string& name : config.checks) {
    if (name == "all") {
      for (const CheckInfo& c : registry())
        if (c.applies_to(config.system)) out.push_back(&c);
      continue;
    }
    const auto it = std::find_if(registry().begin(), registry().end(), [&](const CheckInfo& c) { return c.name == name; });
    if (it == registry().end()) throw Error(ErrorKind::UnknownCheck, "no check named '" + name + "'");
    out.push_back(&*it);
  }
  std::sort(out.begin(), out.end(), [](const CheckInfo* a, const CheckInfo* b) { return a->name < b->name; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

VerifyOutcome cmd_verify(const RunConfig& config, std::ostream& log) {
  const auto checks = select_checks(config);
  RunContext ctx(config, log);
  const WarningHandler previous = set_warning_handler([&log](std::string_view msg) { log << "warning: " << msg << '\n'; });
  struct Restore {
    WarningHandler h;
    ~Restore() { set_warning_handler(std::move(h)); }
  } restore{previous};

  std::vector<double> times = config.times;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  VerifyOutcome outcome;
  const auto run_one = [&](const CheckInfo& info, std::optional<double> t) {
    CheckReport rep{info.name, info.module, std::string(to_string(config.system)), ctx.params(), t, {}, 0.0};
    const auto start = std::chrono::steady_clock::now();
    if (!info.applies_to(config.system)) {
      rep.result = skipped_result("not defined for the " + std::string(to_string(config.system)) + " system");
    } else {
      try {
        rep.result = info.run(ctx, t.value_or(0.0));
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::SingularTime) {
          rep.result = skipped_result(std::string("caustic window: ") + e.what());
          log << "notice: " << info.name << " skipped at t = " << fmt(t.value_or(0.0)) << " (caustic window)\n";
        } else {
          rep.result = make_result(std::nan(""), 0.0);
          rep.result.note = e.what();
        }
      }
    }
    rep.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (rep.result.skipped)
      ++outcome.skipped;
    else if (rep.result.passed)
      ++outcome.passed;
    else
      ++outcome.failed;
    outcome.reports.push_back(std::move(rep));
  };

  for (const CheckInfo* info : checks) {
    if (info->time_dependent)
      for (double t : times) run_one(*info, t);
    else
      run_one(*info, std::nullopt);
  }
  std::stable_sort(outcome.reports.begin(), outcome.reports.end(), [](const CheckReport& a, const CheckReport& b) {
    if (a.check_name != b.check_name) return a.check_name < b.check_name;
    return a.t.value_or(-INFINITY) < b.t.value_or(-INFINITY);
  });
  return outcome;
}

std::string render_json(const RunConfig& config, const VerifyOutcome& outcome) {
  json echo{{"system", std::string(to_string(config.system))},
            {"params", params_json(config.params())},
            {"grid", {config.q_min, config.q_max, config.n}},
            {"times", config.times},
            {"checks", config.checks},
            {"seed", config.seed},
            {"op_n", config.op_n},
            {"fd_n", config.fd_n},
            {"format", config.format == Format::Json ? "json" : "csv"}};
  json reports = json::array();
  for (const CheckReport& r : outcome.reports) {
    json meta = json::object();
    for (const auto& [k, v] : r.result.metadata) meta[k] = v;
    json entry{{"check_name", r.check_name},
               {"module", r.module},
               {"system", r.system},
               {"params", params_json(r.params)},
               {"residual", std::isfinite(r.result.residual) ? json(r.result.residual) : json(nullptr)},
               {"tolerance", r.result.tolerance},
               {"passed", r.result.passed},
               {"skipped", r.result.skipped},
               {"note", r.result.note},
               {"metadata", meta}};
    entry["t"] = r.t ? json(*r.t) : json(nullptr);
    reports.push_back(std::move(entry));
  }
  json doc{{"config_echo", echo},
           {"reports", reports},
           {"summary", {{"passed", outcome.passed}, {"failed", outcome.failed}, {"skipped", outcome.skipped}}}};
  return doc.dump(2) + "\n";
}

std::string render_csv(const RunConfig& config, const VerifyOutcome& outcome) {
  std::ostringstream os;
  const SystemParams p = config.params();
  os << "# qmframe verify system=" << to_string(config.system) << " m=" << fmt(p.mass)
     << " omega=" << (p.omega ? fmt(*p.omega) : "none") << " hbar=" << fmt(p.hbar) << " grid=" << fmt(config.q_min)
     << ':' << fmt(config.q_max) << ':' << config.n << " seed=" << config.seed << '\n';
  os << "# passed=" << outcome.passed << " failed=" << outcome.failed << " skipped=" << outcome.skipped << '\n';
  os << "check_name,module,system,t,residual,tolerance,passed,skipped,note,metadata\n";
  for (const CheckReport& r : outcome.reports) {
    std::string meta;
    for (const auto& [k, v] : r.result.metadata) meta += (meta.empty() ? "" : ";") + k + "=" + v;
    os << r.check_name << ',' << r.module << ',' << r.system << ',' << (r.t ? fmt(*r.t) : "") << ','
       << (std::isfinite(r.result.residual) ? fmt(r.result.residual) : "nan") << ',' << fmt(r.result.tolerance) << ','
       << (r.result.passed ? "true" : "false") << ',' << (r.result.skipped ? "true" : "false") << ','
       << csv_field(r.result.note) << ',' << csv_field(meta) << '\n';
  }
  return os.str();
}

std::string render_timing(const VerifyOutcome& outcome) {
  const std::time_t now = std::time(nullptr);
  std::ostringstream stamp;
  stamp << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  json runs = json::array();
  double total = 0.0;
  for (const CheckReport& r : outcome.reports) {
    json e{{"check_name", r.check_name}, {"runtime_ms", r.runtime_ms}};
    e["t"] = r.t ? json(*r.t) : json(nullptr);
    runs.push_back(std::move(e));
    total += r.runtime_ms;
  }
  return json{{"finished_at", stamp.str()}, {"total_ms", total}, {"checks", runs}}.dump(2) + "\n";
}

std::string cmd_tabulate(const RunConfig& config, const TabulateOptions& o) {
  const SystemParams p = config.params();
  const double t = config.times.front();
  if (o.points < 2) throw Error(ErrorKind::InvalidRange, "tabulation needs at least 2 points");
  if (!(o.hi > o.lo)) throw Error(ErrorKind::InvalidRange, "tabulation range must be increasing");
  const auto axis = [&](int i) { return o.lo + (o.hi - o.lo) * i / (o.points - 1); };

  std::ostringstream os;
  const auto header = [&](std::string_view anchor) {
    os << "# qmframe tabulate what=" << o.what << " system=" << to_string(p.system) << " m=" << fmt(p.mass)
       << " omega=" << (p.omega ? fmt(*p.omega) : "none") << " hbar=" << fmt(p.hbar) << " t=" << fmt(t)
       << " anchor=" << anchor << '\n';
  };

  if (o.what == "kernel") {
    const bool position = o.representation == "position";
    if (!position && o.representation != "momentum")
      throw Error(ErrorKind::ConfigParse, "kernel representation must be position or momentum");
    const KernelSpec spec{position ? Representation::PositionQ : Representation::MomentumP, p};
    if (!kernels::in_window(spec, t)) throw Error(ErrorKind::SingularTime, "kernel is singular at t = " + fmt(t));
    header(position ? "<q|Q;t>" : "<q|P;t>");
    os << (position ? "q,Q,re,im\n" : "q,P,re,im\n");
    for (int i = 0; i < o.points; ++i)
      for (int j = 0; j < o.points; ++j) {
        const cplx k = kernels::kernel(spec, axis(i), axis(j), t);
        os << fmt(axis(i)) << ',' << fmt(axis(j)) << ',' << fmt(k.real()) << ',' << fmt(k.imag()) << '\n';
      }
  } else if (o.what == "moving_number") {
    if (o.part != "re" && o.part != "im" && o.part != "abs")
      throw Error(ErrorKind::ConfigParse, "part must be re, im or abs");
    if (o.n_max < 0) throw Error(ErrorKind::NegativeIndex, "n_max must be non-negative");
    header("<Q;t|n>");
    os << "Q";
    for (int n = 0; n <= o.n_max; ++n) os << ",n" << n << '_' << o.part;
    os << '\n';
    for (int i = 0; i < o.points; ++i) {
      os << fmt(axis(i));
      for (int n = 0; n <= o.n_max; ++n) {
        const cplx v = kernels::moving_number_state(p, axis(i), n, t);
        os << ',' << fmt(o.part == "re" ? v.real() : o.part == "im" ? v.imag() : std::abs(v));
      }
      os << '\n';
    }
  } else if (o.what == "moving_coherent") {
    const cplx z(o.z_re, o.z_im);
    header("<Q;t|z>");
    os << "Q,re,im\n";
    for (int i = 0; i < o.points; ++i) {
      const cplx v = kernels::moving_coherent_state(p, axis(i), z, t);
      os << fmt(axis(i)) << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << '\n';
    }
  } else if (o.what == "moving_momentum") {
    header("<Q;t|p>");
    os << "Q,re,im\n";
    for (int i = 0; i < o.points; ++i) {
      const cplx v = kernels::moving_momentum_state(p, axis(i), o.p, t);
      os << fmt(axis(i)) << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << '\n';
    }
  } else if (o.what == "action") {
    if (o.representation != "qQ" && o.representation != "qP")
      throw Error(ErrorKind::ConfigParse, "action representation must be qQ or qP");
    const hj::GeneratingFunction w(o.representation == "qQ" ? hj::GenRep::qQ : hj::GenRep::qP, p);
    const auto action = hj::quantum_action(w);
    if (!w.in_domain(t)) throw Error(ErrorKind::SingularTime, "W is singular at t = " + fmt(t));
    header("S = W + i hbar int F dt");
    os << "q,W,F,ReS,ImS\n";
    const double f = action.f(t);
    for (int i = 0; i < o.points; ++i) {
      const cplx s = action.value(axis(i), o.x, t);
      os << fmt(axis(i)) << ',' << fmt(w.value(axis(i), o.x, t)) << ',' << fmt(f) << ',' << fmt(s.real()) << ','
         << fmt(s.imag()) << '\n';
    }
  } else {
    throw Error(ErrorKind::ConfigParse, "unknown tabulation '" + o.what + "'");
  }
  return os.str();
}

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::ConfigParse, "cannot write " + path);
  f << text;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moving-frame quantum mechanics: numerical verification of transformation functions"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value file mirroring the flags; flags take precedence");

  std::string system = "free";
  double mass = 1.0;
  double omega = 1.0;
  double hbar = 1.0;
  std::string grid = "-25,25,1024";
  std::string times = "0.3,0.7";
  std::string checks = "all";
  std::uint64_t seed = RunConfig{}.seed;
  std::string out_path;
  std::string format = "json";
  Index op_n = 256;
  Index fd_n = 128;

  app.add_option("--system", system, "free or harmonic")->capture_default_str();
  app.add_option("--m", mass, "particle mass")->capture_default_str();
  auto* omega_opt = app.add_option("--omega", omega, "oscillator frequency")->capture_default_str();
  app.add_option("--hbar", hbar, "reduced Planck constant")->capture_default_str();
  app.add_option("--grid", grid, "qmin,qmax,n")->capture_default_str();
  app.add_option("--times", times, "comma-separated times")->capture_default_str();
  app.add_option("--checks", checks, "comma-separated check names or 'all'")->capture_default_str();
  app.add_option("--seed", seed, "seed for random sample points")->capture_default_str();
  app.add_option("--out", out_path, "output file (default: standard output)");
  app.add_option("--format", format, "json or csv")->capture_default_str();
  app.add_option("--op-n", op_n, "grid size for operator identities")->capture_default_str();
  app.add_option("--fd-n", fd_n, "grid size for the finite-difference K check")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "run checks and write a report")->fallthrough();
  auto* tabulate = app.add_subcommand("tabulate", "write closed-form values as CSV")->fallthrough();
  auto* list = app.add_subcommand("list-checks", "list registered checks")->fallthrough();

  TabulateOptions tab;
  tabulate->add_option("--what", tab.what, "kernel, moving_number, moving_coherent, moving_momentum or action")
      ->capture_default_str();
  tabulate->add_option("--rep", tab.representation, "kernel: position|momentum; action: qQ|qP");
  tabulate->add_option("--part", tab.part, "moving_number column part: re, im or abs")->capture_default_str();
  tabulate->add_option("--points", tab.points, "samples per axis")->capture_default_str();
  tabulate->add_option("--lo", tab.lo, "axis start")->capture_default_str();
  tabulate->add_option("--hi", tab.hi, "axis end")->capture_default_str();
  tabulate->add_option("--n-max", tab.n_max, "highest number state")->capture_default_str();
  tabulate->add_option("--z-re", tab.z_re, "coherent amplitude, real part")->capture_default_str();
  tabulate->add_option("--z-im", tab.z_im, "coherent amplitude, imaginary part")->capture_default_str();
  tabulate->add_option("--p", tab.p, "momentum for moving_momentum")->capture_default_str();
  tabulate->add_option("--x", tab.x, "second argument of W for action")->capture_default_str();

  std::string module;
  list->add_option("--module", module, "only checks of this module");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  if (list->parsed()) {
    const auto found = list_checks(module);
    if (found.empty()) err << "warning: no checks registered for module '" << module << "'\n";
    for (const CheckInfo* c : found) out << c->name << "  [" << c->module << "]  " << c->anchor << '\n';
    return 0;
  }

  RunConfig config;
  try {
    config.system = parse_system(system);
    config.mass = mass;
    config.hbar = hbar;
    if (config.system == System::Free && omega_opt->count() > 0)
      throw Error(ErrorKind::UnsupportedCombination, "--omega is not used by the free particle");
    config.omega = omega;
    const auto g = parse_list(grid, "grid");
    if (g.size() != 3 || g[2] != std::floor(g[2]))
      throw Error(ErrorKind::ConfigParse, "grid must be qmin,qmax,n with integer n");
    config.q_min = g[0];
    config.q_max = g[1];
    config.n = static_cast<Index>(g[2]);
    config.times = parse_list(times, "times");
    config.checks = parse_names(checks);
    config.seed = seed;
    config.out = out_path;
    if (format != "json" && format != "csv") throw Error(ErrorKind::ConfigParse, "format must be json or csv");
    config.format = format == "json" ? Format::Json : Format::Csv;
    config.op_n = op_n;
    config.fd_n = fd_n;
    config.params();
    config.grid();
    evolution::balanced_grid(config.params(), op_n);
    evolution::balanced_grid(config.params(), fd_n);
    if (verify->parsed()) select_checks(config);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  if (tabulate->parsed()) {
    std::string text;
    try {
      text = cmd_tabulate(config, tab);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return 2;
    }
    if (config.out.empty())
      out << text;
    else
      write_file(config.out, text);
    return 0;
  }

  const VerifyOutcome outcome = cmd_verify(config, err);
  const std::string text = config.format == Format::Json ? render_json(config, outcome) : render_csv(config, outcome);
  if (config.out.empty()) {
    out << text;
  } else {
    write_file(config.out, text);
    write_file(config.out + ".timing.json", render_timing(outcome));
  }
  err << "summary: passed " << outcome.passed << ", failed " << outcome.failed << ", skipped " << outcome.skipped
      << '\n';
  return outcome.exit_code();
}

}  // namespace qmframe::cli
