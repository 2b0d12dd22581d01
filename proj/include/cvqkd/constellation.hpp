#pragma once

#include <complex>
#include <string>
#include <vector>

namespace cvqkd {

using cplx = std::complex<double>;

/// Finite modulation alphabet, recentred to zero mean on construction.
class Constellation {
 public:
  Constellation(std::vector<cplx> points, std::vector<double> probs, std::string label = {});

  const std::vector<cplx>& points() const noexcept { return points_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t size() const noexcept { return points_.size(); }

  /// sum_j p_j |zeta_j|^2
  double mean_energy() const;
  /// smallest |zeta_i - zeta_j| over distinct pairs (0 for a single point)
  double min_separation() const;
  /// copy with every point multiplied by a unit phase
  Constellation rotated(double angle) const;

 private:
  std::vector<cplx> points_;
  std::vector<double> probs_;
  std::string label_;
};

struct ConstellationSpec {
  std::string family = "four-point";  // four-point | psk | grid | explicit | bpsk
  double scale = 1.0;
  int order = 4;                      // psk ring size
  int grid_nx = 2;
  int grid_ny = 2;
  double phase = 0.0;                 // psk ring offset, radians
  std::vector<cplx> points;           // explicit
  std::vector<double> probs;          // optional; uniform when empty
};

struct ProjectedDistribution {
  std::vector<double> values;
  std::vector<double> probs;
};

Constellation build_constellation(const ConstellationSpec& spec);

double shannon_entropy(const std::vector<double>& probs);
double shannon_entropy(const Constellation& c);
double shannon_entropy(const ProjectedDistribution& d);

/// Quadrature means sqrt(2) s Re(phase zeta_j), sorted; values closer than merge_tol merge.
/// A negative merge_tol selects the default 1e-9 * max|value|.
ProjectedDistribution project_quadrature(const Constellation& c, cplx phase, double s,
                                         double merge_tol = -1.0);

}  // namespace cvqkd
