#include "cvqkd/constellation.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "cvqkd/errors.hpp"

namespace cvqkd {

Constellation::Constellation(std::vector<cplx> points, std::vector<double> probs,
                             std::string label)
    : points_(std::move(points)), probs_(std::move(probs)), label_(std::move(label)) {
  if (points_.empty()) throw ParameterError("constellation: no points");
  if (probs_.empty()) probs_.assign(points_.size(), 1.0 / points_.size());
  if (probs_.size() != points_.size())
    throw ParameterError("constellation: point and probability counts differ");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p > 0.0) || !std::isfinite(p))
      throw ParameterError("constellation: probabilities must be positive and finite");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    // explicit weights are allowed to be unnormalized, e.g. "2 1 1"
    for (double& p : probs_) p /= total;
  }
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = i + 1; j < points_.size(); ++j)
      if (points_[i] == points_[j]) {
        std::ostringstream os;
        os << "constellation: duplicate point " << points_[i];
        throw ParameterError(os.str());
      }
  cplx mean = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) mean += probs_[i] * points_[i];
  for (auto& z : points_) z -= mean;
}

double Constellation::mean_energy() const {
  double e = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) e += probs_[i] * std::norm(points_[i]);
  return e;
}

double Constellation::min_separation() const {
  if (points_.size() < 2) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = i + 1; j < points_.size(); ++j)
      best = std::min(best, std::abs(points_[i] - points_[j]));
  return best;
}

Constellation Constellation::rotated(double angle) const {
  std::vector<cplx> pts = points_;
  const cplx ph = std::polar(1.0, angle);
  for (auto& z : pts) z *= ph;
  return Constellation(std::move(pts), probs_, label_);
}

Constellation build_constellation(const ConstellationSpec& spec) {
  if (!(spec.scale > 0.0)) throw ParameterError("constellation: scale must be positive");
  std::vector<cplx> pts;
  const double a = spec.scale;
  std::string label = spec.family;
  if (spec.family == "four-point") {
    pts = {{a, a}, {a, -a}, {-a, a}, {-a, -a}};
  } else if (spec.family == "bpsk") {
    pts = {{a, 0.0}, {-a, 0.0}};
  } else if (spec.family == "psk") {
    if (spec.order < 1) throw ParameterError("constellation: psk order must be >= 1");
    for (int k = 0; k < spec.order; ++k)
      pts.push_back(std::polar(a, spec.phase + 2.0 * std::numbers::pi * k / spec.order));
    label = std::to_string(spec.order) + "-psk";
  } else if (spec.family == "grid") {
    if (spec.grid_nx < 1 || spec.grid_ny < 1)
      throw ParameterError("constellation: grid dimensions must be >= 1");
    for (int i = 0; i < spec.grid_nx; ++i)
      for (int j = 0; j < spec.grid_ny; ++j)
        pts.emplace_back(a * (2.0 * i - (spec.grid_nx - 1)), a * (2.0 * j - (spec.grid_ny - 1)));
  } else if (spec.family == "explicit") {
    for (const auto& z : spec.points) pts.push_back(a * z);
  } else {
    throw ParameterError("constellation: unknown family '" + spec.family + "'");
  }
  std::vector<double> probs = spec.probs;
  if (!probs.empty() && probs.size() != pts.size())
    throw ParameterError("constellation: probability count does not match point count");
  return Constellation(std::move(pts), std::move(probs), label);
}

double shannon_entropy(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

double shannon_entropy(const Constellation& c) { return shannon_entropy(c.probs()); }
double shannon_entropy(const ProjectedDistribution& d) { return shannon_entropy(d.probs); }

ProjectedDistribution project_quadrature(const Constellation& c, cplx phase, double s,
                                         double merge_tol) {
  const auto& pts = c.points();
  std::vector<std::pair<double, double>> vp;
  vp.reserve(pts.size());
  double vmax = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double v = std::numbers::sqrt2 * s * (phase * pts[i]).real();
    vp.emplace_back(v, c.probs()[i]);
    vmax = std::max(vmax, std::abs(v));
  }
  if (merge_tol < 0.0) merge_tol = 1e-9 * vmax;
  std::sort(vp.begin(), vp.end());

  ProjectedDistribution out;
  std::size_t i = 0;
  while (i < vp.size()) {
    double wsum = vp[i].second;
    double vsum = vp[i].first * vp[i].second;
    std::size_t j = i + 1;
    while (j < vp.size() && vp[j].first - vp[j - 1].first <= merge_tol) {
      wsum += vp[j].second;
      vsum += vp[j].first * vp[j].second;
      ++j;
    }
    out.values.push_back(vsum / wsum);
    out.probs.push_back(wsum);
    i = j;
  }
  return out;
}

}  // namespace cvqkd
