#include "cvqkd/fock.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace cvqkd {

namespace {

constexpr double kHermitianTolerance = 1e-12;
constexpr double kNegativeClip = -1e-8;

int product(std::span<const int> dims) {
  int p = 1;
  for (int d : dims) p *= d;
  return p;
}

// Associated Laguerre values L_j^{(k)}(x), j = 0..count-1, stored as log-magnitude and
// sign. The three-term recurrence is rescaled whenever it grows large so that
// the caller can combine it with a tiny exp(-x/2) prefactor without overflow.
void laguerre_column(double x, int k, int count, std::vector<double>& log_abs,
                     std::vector<int>& sign) {
  log_abs.assign(count, 0.0);
  sign.assign(count, 1);
  if (count == 0) return;
  constexpr double kBig = 1e150;
  const double kLogBig = std::log(kBig);
  double prev = 1.0;
  double scale = 0.0;
  auto store = [&](int j, double v) {
    if (v == 0.0) {
      log_abs[j] = -std::numeric_limits<double>::infinity();
      sign[j] = 1;
    } else {
      log_abs[j] = std::log(std::abs(v)) + scale;
      sign[j] = v < 0 ? -1 : 1;
    }
  };
  store(0, prev);
  if (count == 1) return;
  double cur = 1.0 + k - x;
  store(1, cur);
  for (int j = 1; j + 1 < count; ++j) {
    const double next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
    prev = cur;
    cur = next;
    if (std::abs(cur) > kBig) {
      cur /= kBig;
      prev /= kBig;
      scale += kLogBig;
    }
    store(j + 1, cur);
  }
}

// Magnitude-and-sign of <n+k|D(alpha)|n> / e^{ik arg(alpha)} for n = 0..count-1.
void displacement_diagonal(double abs_alpha, int k, int count, std::vector<double>& out) {
  out.assign(count, 0.0);
  const double x = abs_alpha * abs_alpha;
  std::vector<double> log_l;
  std::vector<int> sgn;
  laguerre_column(x, k, count, log_l, sgn);
  const double log_a = std::log(abs_alpha);
  for (int n = 0; n < count; ++n) {
    if (!std::isfinite(log_l[n])) continue;
    const double log_pref =
        0.5 * (std::lgamma(n + 1.0) - std::lgamma(n + k + 1.0)) + k * log_a - 0.5 * x;
    out[n] = sgn[n] * std::exp(log_pref + log_l[n]);
  }
}

double poisson_tail_above(double mean, int n_max) {
  // P(K > n_max) for K ~ Poisson(mean).
  if (mean <= 0.0) return 0.0;
  double term = std::exp(-mean);
  double cdf = term;
  for (int k = 1; k <= n_max; ++k) {
    term *= mean / k;
    cdf += term;
  }
  return std::max(0.0, 1.0 - cdf);
}

}  // namespace

// -- DensityMatrix -------------------------------------------------------------------------

DensityMatrix::DensityMatrix(CMatrix entries, std::vector<int> mode_shape, double tail_mass,
                             double trace_tolerance)
    : rho_(std::move(entries)), shape_(std::move(mode_shape)), tail_(tail_mass) {
  if (rho_.rows() != rho_.cols())
    throw StateValidityError("DensityMatrix: matrix is not square");
  if (shape_.empty()) shape_ = {static_cast<int>(rho_.rows())};
  if (product(shape_) != rho_.rows())
    throw StateValidityError("DensityMatrix: mode shape does not match dimension");
  const double asym = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTolerance) {
    std::ostringstream os;
    os << "DensityMatrix: not Hermitian (max asymmetry " << asym << ")";
    throw StateValidityError(os.str());
  }
  rho_ = 0.5 * (rho_ + rho_.adjoint()).eval();
  const double tr = rho_.trace().real();
  if (tr > 1.0 + 1e-10 || tr < 1.0 - trace_tolerance) {
    std::ostringstream os;
    os << "DensityMatrix: trace " << tr << " outside [1 - " << trace_tolerance << ", 1]";
    throw StateValidityError(os.str());
  }
}

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

void DensityMatrix::validate(double trace_tolerance) const {
  const double asym = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTolerance) throw StateValidityError("density matrix not Hermitian");
  const double tr = trace();
  if (tr > 1.0 + 1e-10 || tr < 1.0 - trace_tolerance)
    throw StateValidityError("density matrix trace out of range");
  const double lowest = eigenvalues().minCoeff();
  if (lowest < -1e-10) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << lowest;
    throw StateValidityError(os.str());
  }
}

double OperatorMatrix::unitarity_residual(int max_level) const {
  const int dim = static_cast<int>(entries.cols());
  std::vector<int> shape = mode_shape.empty() ? std::vector<int>{dim} : mode_shape;
  std::vector<int> block;
  for (int idx = 0; idx < dim; ++idx) {
    int rem = idx;
    bool inside = true;
    for (int m = static_cast<int>(shape.size()) - 1; m >= 0; --m) {
      if (rem % shape[m] > max_level) inside = false;
      rem /= shape[m];
    }
    if (inside) block.push_back(idx);
  }
  double worst = 0.0;
  for (int a : block) {
    for (int b : block) {
      const cplx g = entries.col(a).dot(entries.col(b));
      worst = std::max(worst, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  }
  return worst;
}

double WignerGrid::cell_area() const {
  const double dx = x_axis.size() > 1 ? x_axis[1] - x_axis[0] : 0.0;
  const double dp = p_axis.size() > 1 ? p_axis[1] - p_axis[0] : 0.0;
  return dx * dp;
}

double WignerGrid::normalization() const { return values.sum() * cell_area(); }

int WignerGrid::local_maxima(double min_fraction) const {
  const double top = values.maxCoeff();
  int count = 0;
  for (Eigen::Index i = 1; i + 1 < values.rows(); ++i)
    for (Eigen::Index j = 1; j + 1 < values.cols(); ++j) {
      const double v = values(i, j);
      if (v < min_fraction * top) continue;
      bool peak = true;
      for (int di = -1; di <= 1 && peak; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          // ties are credited to the lexicographically first point of a plateau
          if ((di || dj) && (values(i + di, j + dj) > v ||
                             (values(i + di, j + dj) == v && (di < 0 || (di == 0 && dj < 0))))) {
            peak = false;
            break;
          }
      if (peak) ++count;
    }
  return count;
}

// -- construction ------------------------------------------------------------------------

std::vector<double> thermal_populations(double n_bar, int levels) {
  if (n_bar < 0.0) throw ParameterError("thermal occupation must be non-negative");
  std::vector<double> p(levels, 0.0);
  if (levels == 0) return p;
  if (n_bar == 0.0) {
    p[0] = 1.0;
    return p;
  }
  const double q = n_bar / (1.0 + n_bar);
  double v = 1.0 / (1.0 + n_bar);
  for (int k = 0; k < levels; ++k) {
    p[k] = v;
    v *= q;
  }
  return p;
}

DensityMatrix thermal_density(double n_bar, FockCutoff cutoff, double tail_tolerance) {
  if (n_bar < 0.0) throw ParameterError("thermal_density: n_bar must be >= 0");
  const int d = cutoff.dim();
  const double tail = n_bar == 0.0 ? 0.0 : std::pow(n_bar / (1.0 + n_bar), d);
  if (tail > tail_tolerance) {
    std::ostringstream os;
    os << "thermal_density: cutoff n_max=" << cutoff.n_max << " discards tail mass " << tail
       << " > " << tail_tolerance;
    throw TruncationError(os.str(), tail);
  }
  auto p = thermal_populations(n_bar, d);
  double total = 0.0;
  for (double v : p) total += v;
  CMatrix rho = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) rho(k, k) = p[k] / total;
  return DensityMatrix(std::move(rho), {d}, tail);
}

cplx displacement_element(cplx alpha, int m, int n) {
  if (m < 0 || n < 0) return 0.0;
  if (alpha == cplx(0.0)) return m == n ? 1.0 : 0.0;
  const int k = std::abs(m - n);
  const int j = std::min(m, n);
  std::vector<double> diag;
  displacement_diagonal(std::abs(alpha), k, j + 1, diag);
  const double phi = std::arg(alpha);
  const cplx phase = m >= n ? std::polar(1.0, k * phi)
                            : std::polar(1.0, -k * phi) * (k % 2 ? -1.0 : 1.0);
  return diag[j] * phase;
}

CMatrix displacement_block(cplx alpha, int rows, int cols) {
  CMatrix out = CMatrix::Zero(rows, cols);
  if (alpha == cplx(0.0)) {
    for (int i = 0; i < std::min(rows, cols); ++i) out(i, i) = 1.0;
    return out;
  }
  const double a = std::abs(alpha);
  const double phi = std::arg(alpha);
  std::vector<double> diag;
  // lower triangle (m >= n): m = n + k
  for (int k = 0; k < rows; ++k) {
    const int count = std::min(cols, rows - k);
    if (count <= 0) break;
    displacement_diagonal(a, k, count, diag);
    const cplx phase = std::polar(1.0, k * phi);
    for (int n = 0; n < count; ++n) out(n + k, n) = diag[n] * phase;
  }
  // upper triangle (m < n): n = m + k
  for (int k = 1; k < cols; ++k) {
    const int count = std::min(rows, cols - k);
    if (count <= 0) break;
    displacement_diagonal(a, k, count, diag);
    const cplx phase = std::polar(1.0, -k * phi) * (k % 2 ? -1.0 : 1.0);
    for (int m = 0; m < count; ++m) out(m, m + k) = diag[m] * phase;
  }
  return out;
}

OperatorMatrix displacement_matrix(cplx alpha, FockCutoff cutoff, double tail_tolerance) {
  const double tail = poisson_tail_above(std::norm(alpha), cutoff.n_max);
  if (tail > tail_tolerance) {
    std::ostringstream os;
    os << "displacement_matrix: |alpha|^2=" << std::norm(alpha)
       << " too large for n_max=" << cutoff.n_max << " (tail " << tail << ")";
    throw TruncationError(os.str(), tail);
  }
  const int d = cutoff.dim();
  return {displacement_block(alpha, d, d), {d}, true};
}

OperatorMatrix two_mode_squeeze_matrix(double mu, FockCutoff cutoff, double tail_tolerance) {
  const int d = cutoff.dim();
  const double tau = std::tanh(mu);
  const double tail = mu == 0.0 ? 0.0 : std::pow(tau * tau, d);
  if (tail > tail_tolerance) {
    std::ostringstream os;
    os << "two_mode_squeeze_matrix: sinh^2(mu)=" << std::sinh(mu) * std::sinh(mu)
       << " too large for n_max=" << cutoff.n_max;
    throw TruncationError(os.str(), tail);
  }
  CMatrix f = CMatrix::Zero(d * d, d * d);
  if (mu == 0.0) {
    f.setIdentity();
    return {std::move(f), {d, d}, true};
  }
  // F = exp(tau a^dag b^dag) cosh(mu)^{-(1 + N_a + N_b)} exp(-tau a b)
  const double log_tau = std::log(std::abs(tau));
  const double log_cosh = std::log(std::cosh(mu));
  const double tau_sign = tau < 0 ? -1.0 : 1.0;
  auto lf = [](int n) { return std::lgamma(n + 1.0); };
  for (int n2 = 0; n2 < d; ++n2) {
    for (int n3 = 0; n3 < d; ++n3) {
      for (int m2 = 0; m2 < d; ++m2) {
        const int shift = m2 - n2;
        const int m3 = n3 + shift;
        if (m3 < 0 || m3 >= d) continue;
        double sum = 0.0;
        for (int j = std::max(0, -shift); j <= std::min(n2, n3); ++j) {
          const int i = shift + j;
          const int k2 = n2 - j;
          const int k3 = n3 - j;
          const double log_mag = (i + j) * log_tau - lf(j) - lf(i) +
                                 0.5 * (lf(n2) + lf(n3) + lf(m2) + lf(m3)) - lf(k2) - lf(k3) -
                                 (1.0 + k2 + k3) * log_cosh;
          double sgn = (j % 2) ? -1.0 : 1.0;
          if (tau_sign < 0 && (i + j) % 2) sgn = -sgn;
          sum += sgn * std::exp(log_mag);
        }
        f(m2 * d + m3, n2 * d + n3) = sum;
      }
    }
  }
  return {std::move(f), {d, d}, true};
}

OperatorMatrix beam_splitter_matrix(cplx t, cplx r, FockCutoff cutoff) {
  if (std::abs(std::norm(t) + std::norm(r) - 1.0) > 1e-12)
    throw ParameterError("beam_splitter_matrix: |t|^2 + |r|^2 must equal 1");
  const int d = cutoff.dim();
  CMatrix u = CMatrix::Zero(d * d, d * d);
  // U|n1,n2> = (t a^dag - r b^dag)^n1 (conj(r) a^dag + conj(t) b^dag)^n2 |0,0> / sqrt(n1! n2!)
  auto binom = [](int n, int k) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
  };
  auto ipow = [](cplx z, int e) {
    cplx out = 1.0;
    for (int i = 0; i < e; ++i) out *= z;
    return out;
  };
  const cplx rc = std::conj(r);
  const cplx tc = std::conj(t);
  for (int n1 = 0; n1 < d; ++n1) {
    for (int n2 = 0; n2 < d; ++n2) {
      const int total = n1 + n2;
      for (int m1 = std::max(0, total - cutoff.n_max); m1 <= std::min(total, cutoff.n_max);
           ++m1) {
        const int m2 = total - m1;
        cplx amp = 0.0;
        for (int p = std::max(0, m1 - n2); p <= std::min(n1, m1); ++p) {
          const int q = m1 - p;
          amp += binom(n1, p) * binom(n2, q) * ipow(t, p) * ipow(-r, n1 - p) * ipow(rc, q) *
                 ipow(tc, n2 - q);
        }
        const double norm = std::exp(0.5 * (std::lgamma(m1 + 1.0) + std::lgamma(m2 + 1.0) -
                                            std::lgamma(n1 + 1.0) - std::lgamma(n2 + 1.0)));
        u(m1 * d + m2, n1 * d + n2) = amp * norm;
      }
    }
  }
  return {std::move(u), {d, d}, true};
}

DensityMatrix conjugate(const DensityMatrix& rho, const OperatorMatrix& u) {
  if (u.entries.cols() != rho.dim())
    throw ParameterError("conjugate: operator and state dimensions differ");
  CMatrix out = u.entries * rho.matrix() * u.entries.adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  const double tr = out.trace().real();
  const double tail = std::max(0.0, rho.trace() - tr) + rho.tail_mass();
  if (tr < 1.0 - kDefaultTailTolerance)
    throw TruncationError("conjugate: operator pushes weight beyond the cutoff", tail);
  return DensityMatrix(std::move(out), rho.mode_shape(), tail);
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  const int da = a.dim();
  const int db = b.dim();
  CMatrix out(da * db, da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j) out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
  std::vector<int> shape = a.mode_shape();
  shape.insert(shape.end(), b.mode_shape().begin(), b.mode_shape().end());
  return DensityMatrix(std::move(out), std::move(shape), a.tail_mass() + b.tail_mass());
}

// -- reductions -----------------------------------------------------------------------------

CMatrix partial_trace_matrix(const CMatrix& rho, std::span<const int> shape,
                             std::span<const int> keep) {
  const int modes = static_cast<int>(shape.size());
  std::vector<bool> kept(modes, false);
  for (int k : keep) {
    if (k < 0 || k >= modes) throw ParameterError("partial_trace: invalid mode index");
    if (kept[k]) throw ParameterError("partial_trace: repeated mode index");
    kept[k] = true;
  }
  std::vector<int> stride(modes, 1);
  for (int m = modes - 2; m >= 0; --m) stride[m] = stride[m + 1] * shape[m + 1];

  std::vector<int> keep_sorted(keep.begin(), keep.end());
  std::sort(keep_sorted.begin(), keep_sorted.end());
  std::vector<int> traced;
  for (int m = 0; m < modes; ++m)
    if (!kept[m]) traced.push_back(m);

  auto offsets = [&](const std::vector<int>& which) {
    int count = 1;
    for (int m : which) count *= shape[m];
    std::vector<int> off(count, 0);
    for (int idx = 0; idx < count; ++idx) {
      int rem = idx;
      int o = 0;
      for (int w = static_cast<int>(which.size()) - 1; w >= 0; --w) {
        const int m = which[w];
        o += (rem % shape[m]) * stride[m];
        rem /= shape[m];
      }
      off[idx] = o;
    }
    return off;
  };
  const auto keep_off = offsets(keep_sorted);
  const auto trace_off = offsets(traced);
  const int dk = static_cast<int>(keep_off.size());
  CMatrix out = CMatrix::Zero(dk, dk);
  for (int i = 0; i < dk; ++i)
    for (int j = 0; j < dk; ++j) {
      cplx acc = 0.0;
      for (int t : trace_off) acc += rho(keep_off[i] + t, keep_off[j] + t);
      out(i, j) = acc;
    }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  CMatrix red = partial_trace_matrix(rho.matrix(), rho.mode_shape(), keep);
  std::vector<int> keep_sorted(keep.begin(), keep.end());
  std::sort(keep_sorted.begin(), keep_sorted.end());
  std::vector<int> shape;
  for (int k : keep_sorted) shape.push_back(rho.mode_shape()[k]);
  const double tol = std::max(kDefaultTailTolerance, 1.0 - rho.trace() + 1e-12);
  return DensityMatrix(std::move(red), std::move(shape), rho.tail_mass(), tol);
}

double entropy_of_spectrum(std::span<const double> eigenvalues) {
  double h = 0.0;
  for (double w : eigenvalues) {
    if (w < kNegativeClip) {
      std::ostringstream os;
      os << "von_neumann_entropy: eigenvalue " << w << " below " << kNegativeClip;
      throw StateValidityError(os.str());
    }
    if (w > 0.0) h -= w * std::log(w);
  }
  return h;
}

double von_neumann_entropy(const DensityMatrix& rho) {
  const Eigen::VectorXd w = rho.eigenvalues();
  return entropy_of_spectrum(std::span<const double>(w.data(), static_cast<size_t>(w.size())));
}

namespace {

struct QuadratureMoments {
  double mx, mp, sx, sp;
};

QuadratureMoments quadrature_moments(const CMatrix& m) {
  const int d = static_cast<int>(m.rows());
  CMatrix a = CMatrix::Zero(d, d);
  for (int k = 1; k < d; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  const cplx ea = (m * a).trace();
  const cplx ea2 = (m * a * a).trace();
  const double ena = (m * a.adjoint() * a).trace().real();
  QuadratureMoments q;
  q.mx = std::numbers::sqrt2 * ea.real();
  q.mp = std::numbers::sqrt2 * ea.imag();
  const double vx = (2.0 * ea2.real() + 2.0 * ena + 1.0) / 2.0 - q.mx * q.mx;
  const double vp = (-2.0 * ea2.real() + 2.0 * ena + 1.0) / 2.0 - q.mp * q.mp;
  q.sx = std::sqrt(std::max(vx, 0.0));
  q.sp = std::sqrt(std::max(vp, 0.0));
  return q;
}

}  // namespace

GridSpec covering_grid(const DensityMatrix& rho, int points) {
  if (rho.modes() != 1) throw ParameterError("covering_grid: single-mode state required");
  const QuadratureMoments q = quadrature_moments(rho.matrix());
  const double half = std::max(
      4.0, std::max(std::abs(q.mx) + 6.0 * q.sx, std::abs(q.mp) + 6.0 * q.sp));
  GridSpec g;
  g.x_min = g.p_min = -half;
  g.x_max = g.p_max = half;
  g.nx = g.np = points % 2 ? points : points + 1;
  return g;
}

WignerGrid wigner_grid(const DensityMatrix& rho, const GridSpec& grid) {
  if (rho.modes() != 1) throw ParameterError("wigner_grid: single-mode state required");
  if (grid.nx < 2 || grid.np < 2 || grid.x_max <= grid.x_min || grid.p_max <= grid.p_min)
    throw ParameterError("wigner_grid: degenerate grid");
  const int d = rho.dim();
  const CMatrix& m = rho.matrix();

  WignerGrid out;
  out.x_axis.resize(grid.nx);
  out.p_axis.resize(grid.np);
  for (int i = 0; i < grid.nx; ++i)
    out.x_axis[i] = grid.x_min + (grid.x_max - grid.x_min) * i / (grid.nx - 1);
  for (int i = 0; i < grid.np; ++i)
    out.p_axis[i] = grid.p_min + (grid.p_max - grid.p_min) * i / (grid.np - 1);
  out.values.resize(grid.nx, grid.np);

  // parity-weighted transpose: W = (1/pi) sum_{n,m} rho_{nm} (-1)^n <m|D(2 alpha)|n>
  CMatrix weighted(d, d);
  for (int n = 0; n < d; ++n)
    for (int mm = 0; mm < d; ++mm) weighted(mm, n) = m(n, mm) * ((n % 2) ? -1.0 : 1.0);

  for (int ix = 0; ix < grid.nx; ++ix) {
    for (int ip = 0; ip < grid.np; ++ip) {
      const cplx alpha(out.x_axis[ix] / std::numbers::sqrt2, out.p_axis[ip] / std::numbers::sqrt2);
      const CMatrix dm = displacement_block(2.0 * alpha, d, d);
      out.values(ix, ip) = (dm.cwiseProduct(weighted)).sum().real() / std::numbers::pi;
    }
  }

  // coverage: state mean +/- 5 standard deviations in each quadrature
  const auto [mx, mp, sx, sp] = quadrature_moments(m);
  if (mx - 5 * sx < grid.x_min || mx + 5 * sx > grid.x_max || mp - 5 * sp < grid.p_min ||
      mp + 5 * sp > grid.p_max) {
    out.coverage_ok = false;
    std::ostringstream os;
    os << "grid does not cover mean +/- 5 sigma (x: " << mx << " +/- " << 5 * sx
       << ", p: " << mp << " +/- " << 5 * sp << ")";
    out.warning = os.str();
  }
  return out;
}

// -- purification oracle ----------------------------------------------------------------------

PurifiedStates three_mode_purification_oracle(double channel_occupation, double r_E, double mu,
                                              cplx zeta, double s, FockCutoff cutoff,
                                              double tail_tolerance) {
  if (r_E < 0.0 || r_E > 1.0) throw ParameterError("purification oracle: r_E outside [0, 1]");
  const int d = cutoff.dim();
  // Thermal populations and the squeezed pair are cut at n_max. The displaced channel
  // state spreads further, so mode 1 enters with 2 n_max levels; the beam splitter then
  // conserves total photon number and its outputs fit exactly inside 3 n_max.
  const int d1 = 2 * cutoff.n_max + 1;
  const int w = d1 + d - 1;
  const double t_E = std::sqrt(1.0 - r_E * r_E);

  const auto pops = thermal_populations(channel_occupation, d);
  const OperatorMatrix disp = displacement_matrix(s * zeta, FockCutoff(d1 - 1), 1.0);
  const OperatorMatrix squeeze = two_mode_squeeze_matrix(mu, cutoff, 1.0);
  const OperatorMatrix bs = beam_splitter_matrix(t_E, r_E, FockCutoff(w - 1));
  const CVector tmsv = squeeze.entries.col(0);

  CMatrix rho_b = CMatrix::Zero(w, w);
  CMatrix rho_e = CMatrix::Zero(w * d, w * d);
  CMatrix psi = CMatrix::Zero(w * w, d);
  CMatrix g(w, w * d);
  for (int k = 0; k < d; ++k) {
    if (pops[k] == 0.0) continue;
    for (int i1 = 0; i1 < d1; ++i1)
      for (int i2 = 0; i2 < d; ++i2)
        for (int i3 = 0; i3 < d; ++i3) psi(i1 * w + i2, i3) = disp.entries(i1, k) * tmsv(i2 * d + i3);
    const CMatrix phi = bs.entries * psi;
    for (int i1 = 0; i1 < w; ++i1)
      for (int i2 = 0; i2 < w; ++i2)
        for (int i3 = 0; i3 < d; ++i3) g(i1, i2 * d + i3) = phi(i1 * w + i2, i3);
    rho_b.noalias() += pops[k] * (g * g.adjoint());
    rho_e.noalias() += pops[k] * (g.transpose() * g.conjugate());
  }
  const double tr = rho_b.trace().real();
  const double tail = std::max(0.0, 1.0 - tr);
  if (tail > tail_tolerance) {
    std::ostringstream os;
    os << "purification oracle: truncation tail " << tail << " exceeds " << tail_tolerance
       << " at n_max=" << cutoff.n_max;
    throw TruncationError(os.str(), tail);
  }
  rho_b = 0.5 * (rho_b + rho_b.adjoint()).eval();
  rho_e = 0.5 * (rho_e + rho_e.adjoint()).eval();
  return {DensityMatrix(std::move(rho_b), {w}, tail, tail_tolerance),
          DensityMatrix(std::move(rho_e), {w, d}, tail, tail_tolerance)};
}

}  // namespace cvqkd
