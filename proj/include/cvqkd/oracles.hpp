#pragma once

// Independent reference computations used to cross-check the production paths.
// None of these are used to produce reported results.

#include <array>
#include <functional>

#include "cvqkd/rates.hpp"

namespace cvqkd::oracle {

/// Symplectic eigenvalues (ascending) of the eavesdropper's two-mode covariance matrix,
/// built from the 6x6 covariance of channel thermal mode + TMSV after the beam splitter.
/// Vacuum normalization: eigenvalue 2n+1 for a thermal mode of occupation n.
std::array<double, 2> environment_symplectic_eigenvalues(double n, double r_E, double mu);

/// exp(alpha a^dagger - conj(alpha) a) from the truncated generator at dimension `work_dim`,
/// returned on the leading `dim` x `dim` block.
CMatrix displacement_by_exponential(cplx alpha, int dim, int work_dim);

/// exp[mu (a^dagger b^dagger - a b)] by term-by-term power series of the truncated generator
/// on a (work_dim)^2 space, returned on the leading dim^2 modes.
CMatrix squeeze_by_series(double mu, int dim, int work_dim);

/// h(f) - 1/2 ln(pi e sigma^2) by trapezoid rule with step sigma / (4 * refinement).
double mutual_information_trapezoid(const QuadratureKernel& k, int refinement = 10);

/// Limit of 2 f(s) / s^2 as s -> 0 from Richardson extrapolation in h = s^2 over
/// s_k = s0 / 2^k, k = 0..levels-1.
double curvature_richardson(const std::function<double(double)>& f, double s0, int levels = 4);

}  // namespace cvqkd::oracle
