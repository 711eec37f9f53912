#include "mjpa/iph.hpp"

#include "mjpa/errors.hpp"
#include "mjpa/grid.hpp"
#include "mjpa/transition.hpp"

#include <algorithm>
#include <cmath>

namespace mjpa {

namespace {

constexpr double kWeightTol = 1e-12;

void check_alpha(const ProbVector &alpha, const QSequence &qs) {
  if (static_cast<std::size_t>(alpha.size()) != qs.dim())
    throw DimensionError("alpha has length " + std::to_string(alpha.size()) +
                         " but the Q sequence is " + std::to_string(qs.dim()) + "-dimensional");
}

void check_time(double t) {
  if (!(t >= 0.0))
    throw InvalidInput("mixture density: t must be >= 0");
}

} // namespace

std::vector<RowVector> survival_vectors(const ProbVector &alpha, const QSequence &qs,
                                        std::size_t L) {
  check_alpha(alpha, qs);
  std::vector<RowVector> v;
  v.reserve(L + 1);
  v.push_back(alpha.values());
  for (std::size_t l = 1; l <= L; ++l)
    v.push_back(v.back() * qs.at(l));
  return v;
}

ErlangMixture iph_weights(const ProbVector &alpha, const QSequence &qs, std::size_t L_max,
                          double mass_tol) {
  check_alpha(alpha, qs);
  if (L_max == 0)
    throw InvalidInput("iph_weights: L_max must be >= 1");
  if (!(mass_tol >= 0.0))
    throw InvalidInput("iph_weights: mass_tol must be >= 0");
  ErlangMixture m;
  m.rate = qs.rate();
  RowVector v = alpha.values();
  double captured = 0.0;
  for (std::size_t l = 1; l <= L_max; ++l) {
    if (v.sum() < mass_tol)
      break;
    RowVector next = v * qs.at(l);
    const double w = v.sum() - next.sum();
    if (w < -kWeightTol && qs.policy() == QPolicy::strict)
      throw NumericalError("negative mixture weight w_" + std::to_string(l) + " = " +
                           std::to_string(w));
    m.weights.push_back(w);
    captured += w;
    v = std::move(next);
  }
  m.defect = 1.0 - captured;
  return m;
}

double mixture_pdf(const ErlangMixture &m, double t) {
  check_time(t);
  const std::size_t L = m.weights.size();
  if (L == 0)
    return 0.0;
  // Erlang(l, n) density at t is n Poi_{nt}(l - 1)
  double total = 0.0;
  poisson_sweep(m.rate * t, L - 1, [&](std::uint64_t j, double pmf) {
    total += m.weights[j] * pmf;
  });
  return m.rate * total;
}

double mixture_cdf(const ErlangMixture &m, double t) {
  check_time(t);
  const std::size_t L = m.weights.size();
  if (L == 0 || t == 0.0)
    return 0.0;
  // P(Erlang(l, n) > t) = P(Poi(nt) < l), so
  // F(t) = W - sum_{j < L} Poi_{nt}(j) W_{>j} with W_{>j} = sum_{l > j} w_l.
  std::vector<double> tail(L + 1, 0.0);
  for (std::size_t l = L; l >= 1; --l)
    tail[l - 1] = tail[l] + m.weights[l - 1];
  double survival = 0.0;
  poisson_sweep(m.rate * t, L - 1, [&](std::uint64_t j, double pmf) {
    survival += pmf * tail[j];
  });
  return std::clamp(tail[0] - survival, 0.0, 1.0);
}

std::vector<double> mixture_pdf(const ErlangMixture &m, const std::vector<double> &ts) {
  std::vector<double> out(ts.size());
  std::transform(ts.begin(), ts.end(), out.begin(), [&](double t) { return mixture_pdf(m, t); });
  return out;
}

std::vector<double> mixture_cdf(const ErlangMixture &m, const std::vector<double> &ts) {
  std::vector<double> out(ts.size());
  std::transform(ts.begin(), ts.end(), out.begin(), [&](double t) { return mixture_cdf(m, t); });
  return out;
}

double mixture_mean(const ErlangMixture &m) {
  double total = 0.0;
  for (std::size_t l = 1; l <= m.weights.size(); ++l)
    total += m.weights[l - 1] * static_cast<double>(l);
  return total / m.rate;
}

std::string to_string(HazardEstimator e) {
  return e == HazardEstimator::nelson_aalen ? "nelson_aalen" : "neg_log_ecdf";
}

HazardEstimator hazard_estimator_from_string(const std::string &name) {
  if (name == "nelson_aalen" || name == "nelson-aalen")
    return HazardEstimator::nelson_aalen;
  if (name == "neg_log_ecdf" || name == "neg-log-ecdf")
    return HazardEstimator::neg_log_ecdf;
  throw InvalidInput("unknown estimator '" + name + "' (expected nelson_aalen or neg_log_ecdf)");
}

HazardDensityFit hazard_density_estimate(const std::vector<double> &sample, double n,
                                         std::optional<std::size_t> L_max,
                                         HazardEstimator estimator, double mass_tol) {
  if (sample.empty())
    throw InvalidInput("hazard_density_estimate: empty sample");
  if (!(n > 0.0) || !std::isfinite(n))
    throw InvalidInput("hazard_density_estimate: n must be positive");
  const double largest = *std::max_element(sample.begin(), sample.end());
  const std::size_t L =
      L_max.value_or(std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(n * largest))));
  auto hazard = estimator == HazardEstimator::nelson_aalen ? nelson_aalen(sample)
                                                           : neg_log_ecdf_hazard(sample);
  const auto qs = QSequence::scalar_hazard(std::move(hazard), n);
  HazardDensityFit fit;
  fit.mixture = iph_weights(ProbVector(RowVector::Ones(1)), qs, L, mass_tol);
  fit.q.reserve(fit.mixture.weights.size());
  for (std::size_t l = 1; l <= fit.mixture.weights.size(); ++l)
    fit.q.push_back(qs.at(l)(0, 0));
  fit.clamped = qs.clamped();
  return fit;
}

ErlangMixture conditional_weights_mc(const IPHModel &model, double n, std::size_t L_max,
                                     std::size_t replications, std::uint64_t seed,
                                     double mass_tol) {
  if (replications == 0)
    throw InvalidInput("conditional_weights_mc: need at least one replication");
  ErlangMixture avg;
  avg.rate = n;
  avg.weights.assign(L_max, 0.0);
  for (std::size_t r = 0; r < replications; ++r) {
    const auto qs = QSequence::conditional(model.sub, sample_grid(n, L_max, seed, r));
    const auto m = iph_weights(model.alpha, qs, L_max, mass_tol);
    for (std::size_t l = 0; l < m.weights.size(); ++l)
      avg.weights[l] += m.weights[l];
  }
  double captured = 0.0;
  for (auto &w : avg.weights) {
    w /= static_cast<double>(replications);
    captured += w;
  }
  while (!avg.weights.empty() && avg.weights.back() == 0.0)
    avg.weights.pop_back();
  avg.defect = 1.0 - captured;
  return avg;
}

std::vector<double> oracle_density(const IPHModel &model, const std::vector<double> &ts,
                                   double step_tol) {
  std::vector<double> times;
  times.reserve(ts.size() + 1);
  times.push_back(0.0);
  for (double t : ts) {
    if (t < times.back())
      throw InvalidInput("oracle_density: times must be nondecreasing and >= 0");
    times.push_back(t);
  }
  const auto path = product_integral_path(model.sub, times, step_tol);
  std::vector<double> out(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i)
    out[i] = (model.alpha.values() * path[i + 1] * model.exit_vector(ts[i]))(0);
  return out;
}

} // namespace mjpa
