#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cvqkd/rates.hpp"

namespace cvqkd {

namespace {

struct ReferenceSpectrum {
  std::vector<int> a2;
  std::vector<int> a3;
  std::vector<double> weight;  // renormalized to 1
  double tail = 0.0;
  int levels2 = 0;
  int levels3 = 0;
};

// Largest-weight product levels of rho_th(n2) (x) rho_th(n3) until at most `tail` of the
// probability is left out.
ReferenceSpectrum reference_spectrum(double n2, double n3, double tail) {
  const double q2 = n2 / (1.0 + n2);
  const double q3 = n3 / (1.0 + n3);
  const double log_floor = std::log(tail) - 12.0;
  auto max_level = [&](double n, double q) {
    if (n == 0.0) return 0;
    // p_k = q^k / (1+n)
    const double lvl = (log_floor + std::log1p(n)) / std::log(q);
    return static_cast<int>(std::ceil(std::max(0.0, lvl)));
  };
  const int l2 = max_level(n2, q2);
  const int l3 = max_level(n3, q3);
  const double lp2 = n2 == 0.0 ? 0.0 : std::log(q2);
  const double lp3 = n3 == 0.0 ? 0.0 : std::log(q3);
  const double l0 = -std::log1p(n2) - std::log1p(n3);

  struct Entry {
    double logw;
    int a, b;
  };
  std::vector<Entry> cand;
  for (int a = 0; a <= l2; ++a)
    for (int b = 0; b <= l3; ++b) {
      const double lw = l0 + a * lp2 + b * lp3;
      if (lw >= log_floor) cand.push_back({lw, a, b});
    }
  std::sort(cand.begin(), cand.end(), [](const Entry& x, const Entry& y) {
    if (x.logw != y.logw) return x.logw > y.logw;
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });

  ReferenceSpectrum out;
  double kept = 0.0;
  for (const Entry& e : cand) {
    if (kept >= 1.0 - tail) break;
    const double w = std::exp(e.logw);
    out.a2.push_back(e.a);
    out.a3.push_back(e.b);
    out.weight.push_back(w);
    kept += w;
    out.levels2 = std::max(out.levels2, e.a);
    out.levels3 = std::max(out.levels3, e.b);
  }
  out.tail = std::max(0.0, 1.0 - kept);
  for (double& w : out.weight) w /= kept;
  return out;
}

double spectrum_entropy(const Eigen::VectorXd& w) {
  return entropy_of_spectrum(std::span<const double>(w.data(), static_cast<size_t>(w.size())));
}

struct GramResult {
  double chi;
  int dimension;
};

GramResult gram_holevo(const std::vector<double>& p, const std::vector<EnvironmentDisplacement>& z,
                       const ReferenceSpectrum& ref, int max_dimension) {
  const int m = static_cast<int>(p.size());
  const int k = static_cast<int>(ref.weight.size());
  const long dim = static_cast<long>(m) * k;
  if (dim > max_dimension) {
    std::ostringstream os;
    os << "holevo_bound: Gram dimension " << dim << " exceeds limit " << max_dimension;
    throw TruncationError(os.str(), ref.tail);
  }
  std::vector<double> sw(k);
  for (int a = 0; a < k; ++a) sw[a] = std::sqrt(ref.weight[a]);

  CMatrix g(dim, dim);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      const cplx d2 = z[j].z2 - z[i].z2;
      const cplx d3 = z[j].z3 - z[i].z3;
      const double ph =
          (std::conj(z[i].z2) * z[j].z2).imag() + (std::conj(z[i].z3) * z[j].z3).imag();
      const cplx pref = std::sqrt(p[i] * p[j]) * std::polar(1.0, ph);
      const CMatrix b2 = displacement_block(d2, ref.levels2 + 1, ref.levels2 + 1);
      const CMatrix b3 = displacement_block(d3, ref.levels3 + 1, ref.levels3 + 1);
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
          const cplx v = pref * sw[a] * sw[b] * b2(ref.a2[a], ref.a2[b]) * b3(ref.a3[a], ref.a3[b]);
          g(i * k + a, j * k + b) = v;
          g(j * k + b, i * k + a) = std::conj(v);
        }
    }
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
  Eigen::VectorXd lam(k);
  for (int a = 0; a < k; ++a) lam[a] = ref.weight[a];
  return {spectrum_entropy(es.eigenvalues()) - spectrum_entropy(lam), static_cast<int>(dim)};
}

}  // namespace

HolevoResult holevo_bound(const ScenarioConfig& sc, double s, const HolevoOptions& opt) {
  sc.validate();
  HolevoResult res;
  if (sc.eve.r_E == 0.0 || s == 0.0 || sc.constellation.size() < 2) return res;

  const EnvironmentNormalForm nf = environment_normal_form(sc.eve, sc.n);
  std::vector<EnvironmentDisplacement> z;
  for (std::size_t j = 0; j < sc.constellation.size(); ++j)
    z.push_back(environment_displacement(sc.channel_point(j), s, sc.eve, nf.gamma));
  const auto& p = sc.constellation.probs();

  double tail = opt.initial_tail;
  ReferenceSpectrum ref = reference_spectrum(nf.n2, nf.n3, tail);
  GramResult cur = gram_holevo(p, z, ref, opt.max_dimension);
  const bool pure_reference = ref.tail == 0.0;
  while (!pure_reference) {
    const double finer_tail = tail * 1e-2;
    ReferenceSpectrum finer = reference_spectrum(nf.n2, nf.n3, finer_tail);
    GramResult next = gram_holevo(p, z, finer, opt.max_dimension);
    const double change = std::abs(next.chi - cur.chi);
    tail = finer_tail;
    ref = std::move(finer);
    cur = next;
    if (change < opt.change_tolerance) break;
    if (tail < opt.min_tail) {
      std::ostringstream os;
      os << "holevo_bound: no convergence down to reference tail " << tail << " (last change "
         << change << ")";
      throw TruncationError(os.str(), ref.tail);
    }
  }
  res.chi = std::max(0.0, cur.chi);
  res.levels = std::max(ref.levels2, ref.levels3);
  res.dimension = cur.dimension;
  res.tail_mass = ref.tail;
  return res;
}

double holevo_quantity(const std::vector<double>& probs, const std::vector<CMatrix>& states) {
  if (probs.size() != states.size() || probs.empty())
    throw ParameterError("holevo_quantity: probabilities and states differ in count");
  CMatrix avg = CMatrix::Zero(states[0].rows(), states[0].cols());
  double conditional = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    avg += probs[j] * states[j];
    Eigen::SelfAdjointEigenSolver<CMatrix> es(states[j], Eigen::EigenvaluesOnly);
    conditional += probs[j] * spectrum_entropy(es.eigenvalues());
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(avg, Eigen::EigenvaluesOnly);
  return spectrum_entropy(es.eigenvalues()) - conditional;
}

HolevoResult holevo_bound_fock(const ScenarioConfig& sc, double s, int start_n_max,
                               double change_tolerance, int max_n_max) {
  sc.validate();
  HolevoResult res;
  if (sc.eve.r_E == 0.0 || s == 0.0 || sc.constellation.size() < 2) return res;
  const EnvironmentNormalForm nf = environment_normal_form(sc.eve, sc.n);
  const auto& p = sc.constellation.probs();

  auto evaluate = [&](int n_max) {
    const FockCutoff c(n_max);
    const int d = c.dim();
    CMatrix avg = CMatrix::Zero(d * d, d * d);
    for (std::size_t j = 0; j < p.size(); ++j) {
      const auto z = environment_displacement(sc.channel_point(j), s, sc.eve, nf.gamma);
      avg += p[j] * environment_component(nf, z, c).matrix();
    }
    const DensityMatrix ref = environment_component(nf, {0.0, 0.0}, c);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(avg, Eigen::EigenvaluesOnly);
    return spectrum_entropy(es.eigenvalues()) - von_neumann_entropy(ref);
  };

  if (start_n_max <= 0) {
    double zmax = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const auto z = environment_displacement(sc.channel_point(j), s, sc.eve, nf.gamma);
      zmax = std::max({zmax, std::norm(z.z2), std::norm(z.z3)});
    }
    start_n_max = static_cast<int>(std::ceil(4.0 * (std::max(nf.n2, nf.n3) + zmax) + 10.0));
  }
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int n_max = std::min(start_n_max, max_n_max);;
       n_max = std::min(2 * n_max, max_n_max)) {
    double chi;
    try {
      chi = evaluate(n_max);
    } catch (const TruncationError&) {
      if (n_max == max_n_max) break;
      continue;
    }
    if (!std::isnan(prev) && std::abs(chi - prev) < change_tolerance) {
      res.chi = chi;
      res.levels = n_max;
      res.dimension = (n_max + 1) * (n_max + 1);
      return res;
    }
    prev = chi;
    if (n_max == max_n_max) break;
  }
  throw TruncationError("holevo_bound_fock: no convergence up to n_max=" + std::to_string(max_n_max));
}

}  // namespace cvqkd
