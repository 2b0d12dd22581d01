#pragma once

// Finite-dimensional operator algebra over truncated Fock spaces.
//
// Multi-mode objects use a row-major tensor layout: for mode dimensions
// (d0, d1, ..., dk) the basis state |i0, i1, ..., ik> has flat index
// ((i0 * d1 + i1) * d2 + i2) ... so mode 0 is the most significant digit.

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvqkd/errors.hpp"

namespace cvqkd {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kDefaultTailTolerance = 1e-6;

/// Highest retained Fock level of one mode; the per-mode dimension is n_max + 1.
struct FockCutoff {
  int n_max = 0;

  constexpr FockCutoff() = default;
  explicit FockCutoff(int n) : n_max(n) {
    if (n < 0) throw ParameterError("FockCutoff: n_max must be non-negative");
  }
  int dim() const noexcept { return n_max + 1; }
};

/// Hermitian, trace-normalized (up to reported truncation tail) density matrix.
class DensityMatrix {
 public:
  /// Checks Hermiticity (1e-12 entrywise) and the trace window [1 - trace_tolerance, 1],
  /// then stores the exactly Hermitian part.
  DensityMatrix(CMatrix entries, std::vector<int> mode_shape, double tail_mass = 0.0,
                double trace_tolerance = kDefaultTailTolerance);

  const CMatrix& matrix() const noexcept { return rho_; }
  int dim() const noexcept { return static_cast<int>(rho_.rows()); }
  const std::vector<int>& mode_shape() const noexcept { return shape_; }
  int modes() const noexcept { return static_cast<int>(shape_.size()); }
  double trace() const { return rho_.trace().real(); }
  /// Probability weight discarded by the truncation that produced this state.
  double tail_mass() const noexcept { return tail_; }

  /// Ascending eigenvalues.
  Eigen::VectorXd eigenvalues() const;

  /// Full invariant check including positivity; throws StateValidityError.
  void validate(double trace_tolerance = kDefaultTailTolerance) const;

 private:
  CMatrix rho_;
  std::vector<int> shape_;
  double tail_;
};

struct OperatorMatrix {
  CMatrix entries;
  std::vector<int> mode_shape;
  bool unitary = false;

  /// max |(U^dagger U - I)_{ij}| over basis states whose every mode index is <= max_level.
  double unitarity_residual(int max_level) const;
};

struct WignerGrid {
  std::vector<double> x_axis;
  std::vector<double> p_axis;
  Eigen::MatrixXd values;  // values(ix, ip)
  bool coverage_ok = true;
  std::string warning;

  double cell_area() const;
  /// Riemann sum of the grid, ~1 for a normalized state.
  double normalization() const;
  /// Interior grid points strictly above their 8 neighbours and above
  /// min_fraction * (global maximum).
  int local_maxima(double min_fraction = 0.5) const;
};

struct GridSpec {
  double x_min = -5.0;
  double x_max = 5.0;
  double p_min = -5.0;
  double p_max = 5.0;
  int nx = 101;
  int np = 101;
};

// -- state and operator construction ---------------------------------------------------

/// Thermal state with mean occupation n_bar, renormalized over the retained levels.
/// Throws TruncationError if the discarded geometric tail exceeds tail_tolerance.
DensityMatrix thermal_density(double n_bar, FockCutoff cutoff,
                              double tail_tolerance = kDefaultTailTolerance);

/// Occupation probabilities of a thermal state, p_k = n^k / (1+n)^(k+1), k = 0..levels-1.
std::vector<double> thermal_populations(double n_bar, int levels);

/// Single matrix element <m|D(alpha)|n> from the associated-Laguerre closed form.
cplx displacement_element(cplx alpha, int m, int n);

/// Block of exact matrix elements <m|D(alpha)|n> for m < rows, n < cols.
CMatrix displacement_block(cplx alpha, int rows, int cols);

/// D(alpha) = exp(alpha a^dagger - conj(alpha) a) in the truncated basis.
/// Throws TruncationError when the coherent state |alpha> leaks more than tail_tolerance
/// beyond n_max.
OperatorMatrix displacement_matrix(cplx alpha, FockCutoff cutoff,
                                   double tail_tolerance = kDefaultTailTolerance);

/// F(mu) = exp[mu (a2^dagger a3^dagger - a2 a3)] on the two-mode truncated space, built
/// from the exact normal-ordered factorization.
OperatorMatrix two_mode_squeeze_matrix(double mu, FockCutoff cutoff,
                                       double tail_tolerance = kDefaultTailTolerance);

/// Two-mode beam splitter with Heisenberg action a -> t a + conj(r) b, b -> -r a + conj(t) b.
/// Exact on every block of total photon number <= n_max.
OperatorMatrix beam_splitter_matrix(cplx t, cplx r, FockCutoff cutoff);

/// U rho U^dagger.
DensityMatrix conjugate(const DensityMatrix& rho, const OperatorMatrix& u);

/// Tensor product of two states (mode shapes concatenate).
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

// -- reductions -------------------------------------------------------------------------

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);

/// Raw reduction on a matrix with the given mode shape.
CMatrix partial_trace_matrix(const CMatrix& rho, std::span<const int> shape,
                             std::span<const int> keep);

/// Eigenvalues in [-1e-8, 0] are treated as zero; anything below is a StateValidityError.
double entropy_of_spectrum(std::span<const double> eigenvalues);

/// -Tr rho ln rho in nats.
double von_neumann_entropy(const DensityMatrix& rho);

/// Wigner function W(x, p) with alpha = (x + i p)/sqrt(2), evaluated as the displaced
/// parity expectation (1/pi) Tr[rho D(2 alpha) Pi]. The grid is checked against the
/// state's mean +/- 5 standard deviations; a shortfall is reported, not thrown.
WignerGrid wigner_grid(const DensityMatrix& rho, const GridSpec& grid);

/// Square grid centred at the origin that covers the state's mean +/- 6 standard
/// deviations in both quadratures (half-width at least 4), with an odd point count.
GridSpec covering_grid(const DensityMatrix& rho, int points = 101);

// -- purification oracle ------------------------------------------------------------------

struct PurifiedStates {
  DensityMatrix rho_B;  ///< receiver mode
  DensityMatrix rho_E;  ///< environment modes (2, 3)
};

/// Three-mode brute force: displaced thermal channel state D(s zeta) rho_th(n) D^dagger,
/// environment TMSV F(mu)|00>, beam splitter (t_E, r_E) between channel and mode 2.
/// The thermal populations and the squeezed pair are truncated at `cutoff`, the displaced
/// channel mode at 2 n_max; the beam splitter outputs of modes 1 and 2 are kept up to
/// 3 n_max, where they are exact. Returns the reduced receiver state (dimension
/// 3 n_max + 1) and the environment state (shape {3 n_max + 1, n_max + 1}).
PurifiedStates three_mode_purification_oracle(double channel_occupation, double r_E, double mu,
                                              cplx zeta, double s, FockCutoff cutoff,
                                              double tail_tolerance = kDefaultTailTolerance);

}  // namespace cvqkd
