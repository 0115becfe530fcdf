#pragma once

// Discretized one-dimensional Hilbert space: uniform grids, sampled wave
// functions, dense operators and the spectral machinery behind exp(-iHt/hbar).

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <optional>
#include <string_view>

#include "qmframe/error.hpp"

namespace qmframe {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Uniform lattice q_j = q_min + j*dq, j = 0..n-1, dq = (q_max - q_min)/(n - 1).
///
/// The lattice doubles as a periodic cell of length n*dq for the discrete
/// Fourier representation of the momentum operator.
class Grid {
 public:
  Grid(double q_min, double q_max, Index n);

  double q_min() const noexcept { return q_min_; }
  double q_max() const noexcept { return q_max_; }
  Index n() const noexcept { return n_; }
  double dq() const noexcept { return dq_; }

  double point(Index j) const noexcept { return q_min_ + static_cast<double>(j) * dq_; }
  Eigen::VectorXd points() const;

  double period() const noexcept { return static_cast<double>(n_) * dq_; }
  double k_max() const noexcept { return kPi / dq_; }
  /// Wavenumber of discrete Fourier mode m.
  double wavenumber(Index m) const noexcept { return 2.0 * kPi * static_cast<double>(m) / period(); }

  bool contains(double q) const noexcept { return q >= q_min_ && q <= q_max_; }
  Index nearest_index(double q) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double q_min_;
  double q_max_;
  Index n_;
  double dq_;
};

Grid make_grid(double q_min, double q_max, Index n);

enum class System { Free, Harmonic };

std::string_view to_string(System system);
System parse_system(std::string_view name);

/// Physical constants of the model. omega is present iff system == Harmonic.
struct SystemParams {
  System system = System::Free;
  double mass = 1.0;
  double hbar = 1.0;
  std::optional<double> omega;

  static SystemParams free(double mass = 1.0, double hbar = 1.0);
  static SystemParams harmonic(double mass = 1.0, double omega = 1.0, double hbar = 1.0);

  void validate() const;
  double frequency() const;  // throws for Free
  double potential(double q) const;
};

/// Complex amplitudes on a grid, continuum-normalized: sum |amp|^2 dq = 1.
struct WaveFunction {
  WaveFunction(Grid grid, CVector amp);

  Grid grid;
  CVector amp;

  double norm() const;
};

/// Square matrix on a grid. With kernel_weighted the matrix samples a kernel
/// O(q, q') and acts as mat * amp * dq; otherwise it acts as mat * amp
/// (diagonal and differential operators, evolution operators).
struct DenseOperator {
  DenseOperator(Grid grid, CMatrix mat, bool kernel_weighted = false);

  Grid grid;
  CMatrix mat;
  bool kernel_weighted = false;

  /// The matrix that multiplies amplitude vectors directly.
  CMatrix effective() const;
};

DenseOperator position_operator(const Grid& grid);
/// -i hbar d/dq as a discrete-Fourier derivative. For even n the Nyquist mode
/// is mapped to zero so the matrix stays Hermitian.
DenseOperator momentum_operator(const Grid& grid, double hbar = 1.0);
/// p^2/2m (+ m omega^2 q^2 / 2). The kinetic part equals p*p/2m exactly.
DenseOperator hamiltonian(const SystemParams& params, const Grid& grid);

/// exp(-i theta H) for Hermitian H, via a Hermitian eigendecomposition.
DenseOperator matrix_exponential_unitary(const DenseOperator& h, double theta);

/// psi(q) = (2 pi sigma^2)^{-1/4} exp(-(q-q0)^2/(4 sigma^2) + i p0 q / hbar).
/// Warns when q0 -+ 5 sigma leaves the grid.
WaveFunction gaussian_packet(const Grid& grid, double q0, double p0, double sigma, double hbar = 1.0);

/// Amplitude 1/dq at the grid point nearest to q_value.
WaveFunction discrete_delta(const Grid& grid, double q_value);
/// Unit-area Gaussian of standard deviation width (default 3 dq) centered on q_value.
WaveFunction smoothed_delta(const Grid& grid, double q_value, double width = 0.0);

cplx inner_product(const WaveFunction& bra, const WaveFunction& ket);
DenseOperator adjoint(const DenseOperator& a);
DenseOperator compose(const DenseOperator& a, const DenseOperator& b);
DenseOperator commutator(const DenseOperator& a, const DenseOperator& b);
WaveFunction apply(const DenseOperator& a, const WaveFunction& psi);
cplx expectation(const DenseOperator& a, const WaveFunction& psi);

DenseOperator operator+(const DenseOperator& a, const DenseOperator& b);
DenseOperator operator-(const DenseOperator& a, const DenseOperator& b);
DenseOperator operator*(cplx scale, const DenseOperator& a);

/// max |A - A^dagger| entry.
double hermiticity_defect(const DenseOperator& a);
/// Frobenius norm of A^dagger A - I.
double unitarity_defect(const DenseOperator& a);

/// Spectral decomposition of the (real symmetric) discretized Hamiltonian,
/// computed once and reused for every time t.
class Propagator {
 public:
  Propagator(const SystemParams& params, const Grid& grid);

  const SystemParams& params() const noexcept { return params_; }
  const Grid& grid() const noexcept { return hamiltonian_.grid; }
  const DenseOperator& hamiltonian() const noexcept { return hamiltonian_; }
  /// Ascending eigenvalues and the matching orthonormal eigenvectors (columns).
  const Eigen::VectorXd& energies() const noexcept { return energies_; }
  const Eigen::MatrixXd& modes() const noexcept { return modes_; }

  /// T(t) = exp(-i H t / hbar) as a dense matrix.
  DenseOperator evolution_operator(double t) const;
  /// T(t) psi without forming T(t).
  WaveFunction evolve(const WaveFunction& psi, double t) const;

 private:
  SystemParams params_;
  DenseOperator hamiltonian_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd modes_;
};

}  // namespace qmframe
