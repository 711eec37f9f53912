#include "mjpa/grid.hpp"

#include "mjpa/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mjpa {

PoissonGrid sample_grid(double n, std::size_t count, CounterRng &rng) {
  if (!(n >= 1.0) || !std::isfinite(n))
    throw InvalidInput("sample_grid: rate must be >= 1");
  if (count == 0)
    throw InvalidInput("sample_grid: count must be positive");
  PoissonGrid g;
  g.rate = n;
  g.times.resize(count);
  double t = 0.0;
  for (auto &x : g.times) {
    double dt = 0.0;
    while (dt == 0.0)
      dt = rng.exponential(n);
    t += dt;
    x = t;
  }
  return g;
}

PoissonGrid sample_grid(double n, std::size_t count, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  return sample_grid(n, count, rng);
}

int PathRecord::state_at(double t) const {
  int s = initial_state;
  for (std::size_t k = 0; k < times.size() && times[k] <= t; ++k)
    s = states[k];
  return s;
}

namespace {

int draw_initial(const ProbVector &alpha, double u) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    acc += alpha[i];
    if (u < acc)
      return static_cast<int>(i);
  }
  return PathRecord::kCemetery;
}

// Kernel row I + Lambda/lambda0 for row `i`, laid out on [0,1) in state order,
// with the leftover mass [1 + rowsum/lambda0, 1) meaning termination.
int draw_kernel(const Matrix &lam, double lambda0, int i, double u) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < lam.cols(); ++j) {
    acc += lam(i, j) / lambda0 + (j == i ? 1.0 : 0.0);
    if (u < acc)
      return static_cast<int>(j);
  }
  return PathRecord::kCemetery;
}

void check_uniformizable(const IntensityFunction &f, double n) {
  if (n < f.bound() * (1.0 - 1e-12))
    throw PreconditionError("uniformization needs n >= lambda0 (n = " + std::to_string(n) +
                            ", lambda0 = " + std::to_string(f.bound()) + ")");
}

} // namespace

std::vector<int> simulate_embedded(const IntensityFunction &f, const ProbVector &alpha,
                                   const PoissonGrid &chi, CounterRng &rng) {
  const double n = chi.rate;
  check_uniformizable(f, n);
  if (static_cast<std::size_t>(alpha.size()) != f.dim())
    throw DimensionError("alpha length does not match intensity dimension");
  const double lambda0 = f.bound();
  const double consult = lambda0 > 0.0 ? std::min(1.0, lambda0 / n) : 0.0;

  std::vector<int> embedded;
  embedded.reserve(chi.size() + 1);
  int state = draw_initial(alpha, rng.uniform());
  embedded.push_back(state);
  for (std::size_t l = 1; l <= chi.size() && state != PathRecord::kCemetery; ++l) {
    const double v = rng.uniform();
    const double u = rng.uniform();
    if (v < consult)
      state = draw_kernel(f(chi.at(l)), lambda0, state, u);
    embedded.push_back(state);
  }
  return embedded;
}

CoupledPaths simulate_coupled(const IntensityFunction &f, const ProbVector &alpha,
                              const PoissonGrid &chi, const PoissonGrid &theta,
                              std::uint64_t seed, std::uint64_t stream) {
  if (chi.rate != theta.rate)
    throw PreconditionError("simulate_coupled: grids must share the same rate");
  if (chi.size() != theta.size())
    throw PreconditionError("simulate_coupled: grids must have the same length");

  CounterRng rng(seed, stream);
  CoupledPaths out;
  out.embedded = simulate_embedded(f, alpha, chi, rng);

  out.j.initial_state = out.jn.initial_state = out.embedded.front();
  for (std::size_t l = 1; l < out.embedded.size(); ++l) {
    if (out.embedded[l] == out.embedded[l - 1])
      continue;
    out.j.times.push_back(chi.at(l));
    out.jn.times.push_back(theta.at(l));
    for (auto *path : {&out.j, &out.jn}) {
      path->states.push_back(out.embedded[l]);
      path->epochs.push_back(l);
    }
  }
  if (out.embedded.back() == PathRecord::kCemetery)
    out.absorption_index = out.embedded.size() - 1;
  else
    out.grid_exhausted = true;
  return out;
}

double discrepancy(const PoissonGrid &chi, const PoissonGrid &theta, std::size_t L) {
  if (L > chi.size() || L > theta.size())
    throw PreconditionError("discrepancy: L exceeds grid length");
  double m = 0.0;
  for (std::size_t l = 0; l < L; ++l)
    m = std::max(m, std::abs(theta.times[l] - chi.times[l]));
  return m;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty())
    throw InvalidInput("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<RateRow> rate_experiment(const std::vector<double> &n_values, double epsilon,
                                     std::size_t replications, std::uint64_t seed) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw InvalidInput("rate_experiment: epsilon must lie in (0, 1)");
  if (replications == 0)
    throw InvalidInput("rate_experiment: need at least one replication");
  std::vector<RateRow> rows;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    const double n = n_values[i];
    if (!(n > 1.0))
      throw InvalidInput("rate_experiment: n must exceed 1");
    const auto L = static_cast<std::size_t>(std::floor(std::pow(n, 1.0 + epsilon)));
    const double normalizer = std::log(n) * std::pow(n, -0.5 + epsilon / 2.0);
    std::vector<double> normalized(replications);
    for (std::size_t r = 0; r < replications; ++r) {
      // one stream pair per (n index, replication)
      const std::uint64_t base = (static_cast<std::uint64_t>(i) << 40) | (r << 1);
      const auto chi = sample_grid(n, L, seed, base);
      const auto theta = sample_grid(n, L, seed, base | 1u);
      normalized[r] = discrepancy(chi, theta, L) / normalizer;
    }
    rows.push_back({n, epsilon, quantile(normalized, 0.5), quantile(normalized, 0.9),
                    quantile(normalized, 0.99), normalizer});
  }
  return rows;
}

} // namespace mjpa
