#include "qmframe/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace qmframe {

namespace {

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw Error(ErrorKind::GridMismatch, "operands live on different grids");
}

// Real coefficients of the circulant derivative matrices: first[r] and
// second[r] are the entries for index offset r = (j - l) mod n of d/dq and
// -d^2/dq^2 built from the discrete Fourier modes |m| < n/2.
struct CirculantRows {
  Eigen::VectorXd first;
  Eigen::VectorXd second;
};

CirculantRows derivative_rows(const Grid& grid) {
  const Index n = grid.n();
  const Index modes = (n % 2 == 0) ? n / 2 - 1 : (n - 1) / 2;
  CirculantRows rows{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  for (Index r = 0; r < n; ++r) {
    double first = 0.0;
    double second = 0.0;
    for (Index m = 1; m <= modes; ++m) {
      const double k = grid.wavenumber(m);
      const double angle = 2.0 * kPi * static_cast<double>((m * r) % n) / static_cast<double>(n);
      first -= 2.0 * k * std::sin(angle);
      second += 2.0 * k * k * std::cos(angle);
    }
    rows.first(r) = first / static_cast<double>(n);
    rows.second(r) = second / static_cast<double>(n);
  }
  return rows;
}

Eigen::MatrixXd circulant(const Eigen::VectorXd& row) {
  const Index n = row.size();
  Eigen::MatrixXd m(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index l = 0; l < n; ++l) m(j, l) = row(((j - l) % n + n) % n);
  return m;
}

Eigen::MatrixXd kinetic_matrix(const Grid& grid, double mass, double hbar) {
  return circulant(derivative_rows(grid).second) * (hbar * hbar / (2.0 * mass));
}

CMatrix unitary_from_spectrum(const CMatrix& vectors, const Eigen::VectorXd& values, double theta) {
  const CVector phases = (values.cast<cplx>() * cplx(0.0, -theta)).array().exp();
  return vectors * phases.asDiagonal() * vectors.adjoint();
}

}  // namespace

// ---------------------------------------------------------------- Grid

Grid::Grid(double q_min, double q_max, Index n) : q_min_(q_min), q_max_(q_max), n_(n) {
  if (!(q_min < q_max) || !std::isfinite(q_min) || !std::isfinite(q_max)) {
    std::ostringstream os;
    os << "need q_min < q_max, got [" << q_min << ", " << q_max << "]";
    throw Error(ErrorKind::InvalidRange, os.str());
  }
  if (n < 8) throw Error(ErrorKind::TooFewPoints, "grid needs at least 8 points, got " + std::to_string(n));
  dq_ = (q_max - q_min) / static_cast<double>(n - 1);
}

Eigen::VectorXd Grid::points() const {
  Eigen::VectorXd q(n_);
  for (Index j = 0; j < n_; ++j) q(j) = point(j);
  return q;
}

Index Grid::nearest_index(double q) const {
  if (!contains(q)) {
    std::ostringstream os;
    os << "q = " << q << " outside [" << q_min_ << ", " << q_max_ << "]";
    throw Error(ErrorKind::OutsideGrid, os.str());
  }
  const auto j = static_cast<Index>(std::llround((q - q_min_) / dq_));
  return std::clamp<Index>(j, 0, n_ - 1);
}

Grid make_grid(double q_min, double q_max, Index n) { return Grid(q_min, q_max, n); }

// ---------------------------------------------------------------- params

std::string_view to_string(System system) { return system == System::Free ? "free" : "harmonic"; }

System parse_system(std::string_view name) {
  if (name == "free") return System::Free;
  if (name == "harmonic") return System::Harmonic;
  throw Error(ErrorKind::ConfigParse, "unknown system '" + std::string(name) + "' (expected free|harmonic)");
}

SystemParams SystemParams::free(double mass, double hbar) {
  SystemParams p{System::Free, mass, hbar, std::nullopt};
  p.validate();
  return p;
}

SystemParams SystemParams::harmonic(double mass, double omega, double hbar) {
  SystemParams p{System::Harmonic, mass, hbar, omega};
  p.validate();
  return p;
}

void SystemParams::validate() const {
  if (!(mass > 0.0)) throw Error(ErrorKind::InvalidRange, "mass must be positive");
  if (!(hbar > 0.0)) throw Error(ErrorKind::InvalidRange, "hbar must be positive");
  if (system == System::Harmonic && !(omega && *omega > 0.0))
    throw Error(ErrorKind::InvalidRange, "harmonic system needs omega > 0");
  if (system == System::Free && omega)
    throw Error(ErrorKind::UnsupportedCombination, "free particle takes no omega");
}

double SystemParams::frequency() const {
  if (system != System::Harmonic || !omega)
    throw Error(ErrorKind::UnsupportedCombination, "omega is only defined for the harmonic oscillator");
  return *omega;
}

double SystemParams::potential(double q) const {
  if (system == System::Free) return 0.0;
  return 0.5 * mass * (*omega) * (*omega) * q * q;
}

// ---------------------------------------------------------------- states and operators

WaveFunction::WaveFunction(Grid g, CVector a) : grid(std::move(g)), amp(std::move(a)) {
  if (amp.size() != grid.n()) throw Error(ErrorKind::GridMismatch, "amplitude length differs from grid size");
}

double WaveFunction::norm() const { return std::sqrt(amp.squaredNorm() * grid.dq()); }

DenseOperator::DenseOperator(Grid g, CMatrix m, bool weighted)
    : grid(std::move(g)), mat(std::move(m)), kernel_weighted(weighted) {
  if (mat.rows() != grid.n() || mat.cols() != grid.n())
    throw Error(ErrorKind::GridMismatch, "operator dimension differs from grid size");
}

CMatrix DenseOperator::effective() const { return kernel_weighted ? CMatrix(mat * grid.dq()) : mat; }

DenseOperator position_operator(const Grid& grid) {
  return DenseOperator(grid, grid.points().cast<cplx>().asDiagonal().toDenseMatrix());
}

DenseOperator momentum_operator(const Grid& grid, double hbar) {
  const Eigen::MatrixXd d = circulant(derivative_rows(grid).first);
  return DenseOperator(grid, d.cast<cplx>() * cplx(0.0, -hbar));
}

DenseOperator hamiltonian(const SystemParams& params, const Grid& grid) {
  params.validate();
  Eigen::MatrixXd h = kinetic_matrix(grid, params.mass, params.hbar);
  if (params.system == System::Harmonic)
    for (Index j = 0; j < grid.n(); ++j) h(j, j) += params.potential(grid.point(j));
  return DenseOperator(grid, h.cast<cplx>());
}

DenseOperator matrix_exponential_unitary(const DenseOperator& h, double theta) {
  const CMatrix a = h.effective();
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw Error(ErrorKind::NonHermitian, "matrix exponential needs a Hermitian generator");
  if (a.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.real());
    return DenseOperator(h.grid, unitary_from_spectrum(es.eigenvectors().cast<cplx>(), es.eigenvalues(), theta));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
  return DenseOperator(h.grid, unitary_from_spectrum(es.eigenvectors(), es.eigenvalues(), theta));
}

WaveFunction gaussian_packet(const Grid& grid, double q0, double p0, double sigma, double hbar) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidRange, "packet width must be positive");
  if (q0 - 5.0 * sigma < grid.q_min() || q0 + 5.0 * sigma > grid.q_max()) {
    std::ostringstream os;
    os << "gaussian packet at q0=" << q0 << " with sigma=" << sigma << " is closer than 5 sigma to the grid boundary";
    warn(os.str());
  }
  const double norm = std::pow(2.0 * kPi * sigma * sigma, -0.25);
  CVector amp(grid.n());
  for (Index j = 0; j < grid.n(); ++j) {
    const double q = grid.point(j);
    const double x = q - q0;
    amp(j) = norm * std::exp(cplx(-x * x / (4.0 * sigma * sigma), p0 * q / hbar));
  }
  return WaveFunction(grid, std::move(amp));
}

WaveFunction discrete_delta(const Grid& grid, double q_value) {
  CVector amp = CVector::Zero(grid.n());
  amp(grid.nearest_index(q_value)) = 1.0 / grid.dq();
  return WaveFunction(grid, std::move(amp));
}

WaveFunction smoothed_delta(const Grid& grid, double q_value, double width) {
  (void)grid.nearest_index(q_value);  // throws OutsideGrid
  const double w = width > 0.0 ? width : 3.0 * grid.dq();
  const double norm = 1.0 / (std::sqrt(2.0 * kPi) * w);
  CVector amp(grid.n());
  for (Index j = 0; j < grid.n(); ++j) {
    const double x = grid.point(j) - q_value;
    amp(j) = norm * std::exp(-0.5 * x * x / (w * w));
  }
  return WaveFunction(grid, std::move(amp));
}

cplx inner_product(const WaveFunction& bra, const WaveFunction& ket) {
  require_same_grid(bra.grid, ket.grid);
  return bra.amp.dot(ket.amp) * bra.grid.dq();
}

DenseOperator adjoint(const DenseOperator& a) { return DenseOperator(a.grid, a.mat.adjoint(), a.kernel_weighted); }

DenseOperator compose(const DenseOperator& a, const DenseOperator& b) {
  require_same_grid(a.grid, b.grid);
  if (a.kernel_weighted && b.kernel_weighted)
    return DenseOperator(a.grid, (a.mat * b.mat) * a.grid.dq(), true);
  return DenseOperator(a.grid, a.effective() * b.effective());
}

DenseOperator commutator(const DenseOperator& a, const DenseOperator& b) { return compose(a, b) - compose(b, a); }

WaveFunction apply(const DenseOperator& a, const WaveFunction& psi) {
  require_same_grid(a.grid, psi.grid);
  return WaveFunction(psi.grid, a.effective() * psi.amp);
}

cplx expectation(const DenseOperator& a, const WaveFunction& psi) {
  return inner_product(psi, apply(a, psi)) / inner_product(psi, psi);
}

DenseOperator operator+(const DenseOperator& a, const DenseOperator& b) {
  require_same_grid(a.grid, b.grid);
  if (a.kernel_weighted == b.kernel_weighted) return DenseOperator(a.grid, a.mat + b.mat, a.kernel_weighted);
  return DenseOperator(a.grid, a.effective() + b.effective());
}

DenseOperator operator-(const DenseOperator& a, const DenseOperator& b) { return a + cplx(-1.0) * b; }

DenseOperator operator*(cplx scale, const DenseOperator& a) {
  return DenseOperator(a.grid, a.mat * scale, a.kernel_weighted);
}

double hermiticity_defect(const DenseOperator& a) { return (a.mat - a.mat.adjoint()).cwiseAbs().maxCoeff(); }

double unitarity_defect(const DenseOperator& a) {
  const CMatrix u = a.effective();
  return (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).norm();
}

// ---------------------------------------------------------------- Propagator

Propagator::Propagator(const SystemParams& params, const Grid& grid)
    : params_(params), hamiltonian_(qmframe::hamiltonian(params, grid)) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hamiltonian_.mat.real());
  energies_ = es.eigenvalues();
  modes_ = es.eigenvectors();
}

DenseOperator Propagator::evolution_operator(double t) const {
  const CMatrix v = modes_.cast<cplx>();
  return DenseOperator(grid(), unitary_from_spectrum(v, energies_, t / params_.hbar));
}

WaveFunction Propagator::evolve(const WaveFunction& psi, double t) const {
  require_same_grid(grid(), psi.grid);
  const CVector coeff = modes_.transpose().cast<cplx>() * psi.amp;
  const CVector phases = (energies_.cast<cplx>() * cplx(0.0, -t / params_.hbar)).array().exp();
  return WaveFunction(psi.grid, modes_.cast<cplx>() * (phases.array() * coeff.array()).matrix());
}

}  // namespace qmframe
