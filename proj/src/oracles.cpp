#include "cvqkd/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace cvqkd::oracle {

std::array<double, 2> environment_symplectic_eigenvalues(double n, double r_E, double mu) {
  using Eigen::Matrix2d;
  using M6 = Eigen::Matrix<double, 6, 6>;
  const Matrix2d id = Matrix2d::Identity();
  const Matrix2d z = (Matrix2d() << 1, 0, 0, -1).finished();

  // ordering (x1, p1, x2, p2, x3, p3); 1 = channel, 2-3 = eavesdropper TMSV
  M6 v = M6::Zero();
  v.block<2, 2>(0, 0) = (2.0 * n + 1.0) * id;
  v.block<2, 2>(2, 2) = std::cosh(2.0 * mu) * id;
  v.block<2, 2>(4, 4) = std::cosh(2.0 * mu) * id;
  v.block<2, 2>(2, 4) = std::sinh(2.0 * mu) * z;
  v.block<2, 2>(4, 2) = std::sinh(2.0 * mu) * z;

  const double t = std::sqrt(1.0 - r_E * r_E);
  M6 s = M6::Identity();
  s.block<2, 2>(0, 0) = t * id;
  s.block<2, 2>(0, 2) = r_E * id;
  s.block<2, 2>(2, 0) = -r_E * id;
  s.block<2, 2>(2, 2) = t * id;
  const M6 w = s * v * s.transpose();

  const Eigen::Matrix4d ve = w.block<4, 4>(2, 2);
  Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
  omega(0, 1) = omega(2, 3) = 1.0;
  omega(1, 0) = omega(3, 2) = -1.0;
  Eigen::EigenSolver<Eigen::Matrix4d> es(omega * ve);
  std::array<double, 4> nu{};
  for (int i = 0; i < 4; ++i) nu[i] = std::abs(es.eigenvalues()[i].imag());
  std::sort(nu.begin(), nu.end());
  return {0.5 * (nu[0] + nu[1]), 0.5 * (nu[2] + nu[3])};
}

CMatrix displacement_by_exponential(cplx alpha, int dim, int work_dim) {
  CMatrix a = CMatrix::Zero(work_dim, work_dim);
  for (int k = 1; k < work_dim; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  const CMatrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
  const CMatrix full = gen.exp();
  return full.topLeftCorner(dim, dim);
}

CMatrix squeeze_by_series(double mu, int dim, int work_dim) {
  const int w = work_dim;
  CMatrix a = CMatrix::Zero(w, w);
  for (int k = 1; k < w; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  const CMatrix id = CMatrix::Identity(w, w);
  // Kronecker products by hand: mode 0 is the most significant index
  auto kron = [&](const CMatrix& x, const CMatrix& y) {
    CMatrix out(w * w, w * w);
    for (int i = 0; i < w; ++i)
      for (int j = 0; j < w; ++j) out.block(i * w, j * w, w, w) = x(i, j) * y;
    return out;
  };
  const CMatrix ab = kron(a, a);
  const CMatrix gen = mu * (ab.adjoint() - ab);
  CMatrix term = CMatrix::Identity(w * w, w * w);
  CMatrix sum = term;
  for (int k = 1; k < 400; ++k) {
    term = gen * term / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  CMatrix out(dim * dim, dim * dim);
  for (int i2 = 0; i2 < dim; ++i2)
    for (int i3 = 0; i3 < dim; ++i3)
      for (int j2 = 0; j2 < dim; ++j2)
        for (int j3 = 0; j3 < dim; ++j3)
          out(i2 * dim + i3, j2 * dim + j3) = sum(i2 * w + i3, j2 * w + j3);
  return out;
}

double mutual_information_trapezoid(const QuadratureKernel& k, int refinement) {
  const double sigma = std::sqrt(k.sigma2);
  const auto [lo_it, hi_it] = std::minmax_element(k.means.begin(), k.means.end());
  const double lo = *lo_it - 10.0 * sigma;
  const double hi = *hi_it + 10.0 * sigma;
  const double h = sigma / (4.0 * refinement);
  const long steps = static_cast<long>(std::ceil((hi - lo) / h));
  const double dx = (hi - lo) / steps;
  const double norm = 1.0 / std::sqrt(std::numbers::pi * k.sigma2);
  double acc = 0.0;
  for (long i = 0; i <= steps; ++i) {
    const double x = lo + i * dx;
    double f = 0.0;
    for (std::size_t j = 0; j < k.means.size(); ++j) {
      const double u = x - k.means[j];
      f += k.probs[j] * norm * std::exp(-u * u / k.sigma2);
    }
    const double term = f > 0.0 ? -f * std::log(f) : 0.0;
    acc += (i == 0 || i == steps) ? 0.5 * term : term;
  }
  const double hf = acc * dx;
  return hf - 0.5 * std::log(std::numbers::pi * std::numbers::e * k.sigma2);
}

double curvature_richardson(const std::function<double(double)>& f, double s0, int levels) {
  std::vector<double> t;
  for (int k = 0; k < levels; ++k) {
    const double s = s0 / std::pow(2.0, k);
    t.push_back(2.0 * f(s) / (s * s));
  }
  // h = s^2 shrinks by 4 per level; eliminate h, h^2, ...
  for (int m = 1; m < levels; ++m) {
    const double factor = std::pow(4.0, m);
    for (int k = levels - 1; k >= m; --k) t[k] = (factor * t[k] - t[k - 1]) / (factor - 1.0);
  }
  return t.back();
}

}  // namespace cvqkd::oracle
