#include "mjpa/mph.hpp"

#include "mjpa/errors.hpp"
#include "mjpa/rng.hpp"

#include <cmath>
#include <map>
#include <numeric>

namespace mjpa {

RewardMatrix::RewardMatrix(Matrix r) : r_(std::move(r)) {
  if (r_.rows() == 0 || r_.cols() == 0)
    throw DimensionError("reward matrix must be nonempty");
  if (!r_.allFinite() || r_.minCoeff() < 0.0)
    throw InvalidInput("reward rates must be finite and nonnegative");
}

std::uint32_t profile_size(const VisitProfile &i) {
  return std::accumulate(i.begin(), i.end(), std::uint32_t{0});
}

std::size_t MphProfiles::profile_count() const {
  std::size_t total = 0;
  for (const auto &level : levels)
    total += level.size();
  return total;
}

namespace {

Vector absorption_vector(const Matrix &q) {
  return Vector::Ones(q.rows()) - q.rowwise().sum();
}

} // namespace

double mixture_weight(const ProfileWeight &w, const QSequence &qs) {
  return w.alpha.dot(absorption_vector(qs.at(profile_size(w.counts))));
}

MphProfiles alpha_recursion(const ProbVector &pi, const QSequence &qs, std::size_t D,
                            double capacity) {
  if (D == 0)
    throw InvalidInput("alpha_recursion: depth must be >= 1");
  const std::size_t p = qs.dim();
  if (static_cast<std::size_t>(pi.size()) != p)
    throw DimensionError("alpha_recursion: pi does not match the Q sequence");
  const double dp = static_cast<double>(p);
  const double dd = static_cast<double>(D);
  const double entries =
      std::exp(std::lgamma(dd + dp) - std::lgamma(dp) - std::lgamma(dd + 1.0)) * dp;
  if (entries > capacity)
    throw CapacityError("alpha_recursion: about " + std::to_string(entries) +
                        " (profile, state) entries exceed the capacity " +
                        std::to_string(capacity));

  MphProfiles out;
  out.rate = qs.rate();
  out.states = p;
  const auto pe = static_cast<Eigen::Index>(p);

  std::map<VisitProfile, RowVector> level;
  for (std::size_t h = 0; h < p; ++h) {
    VisitProfile e(p, 0);
    e[h] = 1;
    RowVector a = RowVector::Zero(pe);
    a(static_cast<Eigen::Index>(h)) = pi[static_cast<Eigen::Index>(h)];
    level.emplace(std::move(e), std::move(a));
  }

  double captured = 0.0;
  for (std::size_t l = 1; l <= D; ++l) {
    const Matrix &q = qs.at(l);
    const Vector beta = absorption_vector(q);
    std::vector<ProfileWeight> weights;
    weights.reserve(level.size());
    std::map<VisitProfile, RowVector> next;
    for (auto &[counts, alpha] : level) {
      const double rho = alpha.dot(beta);
      captured += rho;
      if (l < D) {
        const RowVector moved = alpha * q;
        for (std::size_t j = 0; j < p; ++j) {
          const double b = moved(static_cast<Eigen::Index>(j));
          if (b == 0.0)
            continue;
          VisitProfile key = counts;
          ++key[j];
          auto [it, fresh] = next.try_emplace(std::move(key), RowVector::Zero(pe));
          it->second(static_cast<Eigen::Index>(j)) += b;
        }
      }
      weights.push_back({counts, alpha, rho});
    }
    out.levels.push_back(std::move(weights));
    level = std::move(next);
  }
  out.defect = 1.0 - captured;
  return out;
}

namespace {

struct Stages {
  std::vector<double> rates;
};

Stages stage_rates(const VisitProfile &i, std::size_t k, const RewardMatrix &r, double n) {
  if (i.size() != r.states())
    throw DimensionError("visit profile length does not match the reward matrix");
  if (k >= r.margins())
    throw DimensionError("margin index out of range");
  Stages s;
  for (std::size_t j = 0; j < i.size(); ++j) {
    const double rj = r(j, k);
    if (i[j] == 0 || rj == 0.0)
      continue;
    s.rates.insert(s.rates.end(), i[j], n / rj);
  }
  if (s.rates.empty())
    throw DegenerateMargin("margin " + std::to_string(k) +
                           " is the point mass at 0 for this visit profile");
  return s;
}

bool degenerate(const VisitProfile &i, std::size_t k, const RewardMatrix &r) {
  for (std::size_t j = 0; j < i.size(); ++j)
    if (i[j] > 0 && r(j, k) > 0.0)
      return false;
  return true;
}

} // namespace

double hypoexp_pdf(const VisitProfile &i, std::size_t k, const RewardMatrix &r, double n,
                   double x) {
  if (!(x >= 0.0))
    throw InvalidInput("hypoexp_pdf: x must be >= 0");
  const auto s = stage_rates(i, k, r, n);
  const auto N = static_cast<Eigen::Index>(s.rates.size());
  Matrix t = Matrix::Zero(N, N);
  for (Eigen::Index a = 0; a < N; ++a) {
    t(a, a) = -s.rates[static_cast<std::size_t>(a)];
    if (a + 1 < N)
      t(a, a + 1) = s.rates[static_cast<std::size_t>(a)];
  }
  return mat_exp(t, x, 1e-14)(0, N - 1) * s.rates.back();
}

std::vector<double> hypoexp_pdf(const VisitProfile &i, std::size_t k, const RewardMatrix &r,
                                double n, const std::vector<double> &xs) {
  const auto s = stage_rates(i, k, r, n);
  double x_max = 0.0;
  for (double x : xs) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw InvalidInput("hypoexp_pdf: x must be finite and >= 0");
    x_max = std::max(x_max, x);
  }
  // P = I + T / c for the bidiagonal stage chain; a_j = (e_1 P^j)_N mu_N
  const double c = *std::max_element(s.rates.begin(), s.rates.end());
  const std::size_t N = s.rates.size();
  const std::uint64_t K = poisson_truncation(c * x_max, 1e-15) + 1;
  std::vector<double> a(K + 1, 0.0);
  std::vector<double> y(N, 0.0);
  y[0] = 1.0;
  for (std::uint64_t j = 0; j <= K; ++j) {
    a[j] = y[N - 1] * s.rates.back();
    for (std::size_t st = N; st-- > 0;) {
      const double stay = 1.0 - s.rates[st] / c;
      const double in = st > 0 ? y[st - 1] * s.rates[st - 1] / c : 0.0;
      y[st] = y[st] * stay + in;
    }
  }
  std::vector<double> out(xs.size(), 0.0);
  for (std::size_t idx = 0; idx < xs.size(); ++idx) {
    double total = 0.0;
    poisson_sweep(c * xs[idx], K, [&](std::uint64_t j, double pmf) { total += pmf * a[j]; });
    out[idx] = total;
  }
  return out;
}

double mph_mixture_mean(const MphProfiles &profiles, const RewardMatrix &r, std::size_t k) {
  if (k >= r.margins())
    throw DimensionError("margin index out of range");
  double total = 0.0;
  for (const auto &level : profiles.levels)
    for (const auto &w : level) {
      double reward = 0.0;
      for (std::size_t j = 0; j < w.counts.size(); ++j)
        reward += static_cast<double>(w.counts[j]) * r(j, k);
      total += w.rho * reward;
    }
  return total / profiles.rate;
}

MphDensity mph_density_grid(const std::vector<std::vector<double>> &grids,
                            const MphProfiles &profiles, const RewardMatrix &r) {
  const std::size_t m = r.margins();
  if (grids.size() != m)
    throw DimensionError("need one grid per margin");
  if (r.states() != profiles.states)
    throw DimensionError("reward matrix rows do not match the number of states");
  std::size_t cells = 1;
  for (const auto &g : grids) {
    if (g.empty())
      throw InvalidInput("empty margin grid");
    cells *= g.size();
  }

  MphDensity out;
  out.values.assign(cells, 0.0);
  out.defect = profiles.defect;
  // margin densities only depend on the counts of contributing states
  std::vector<std::map<VisitProfile, std::vector<double>>> memo(m);
  std::vector<const std::vector<double> *> margin(m);
  std::vector<std::size_t> index(m);

  for (const auto &level : profiles.levels)
    for (const auto &w : level) {
      bool skip = false;
      for (std::size_t k = 0; k < m && !skip; ++k)
        skip = degenerate(w.counts, k, r);
      if (skip) {
        out.excluded_mass += w.rho;
        ++out.excluded_profiles;
        continue;
      }
      if (w.rho == 0.0)
        continue;
      for (std::size_t k = 0; k < m; ++k) {
        VisitProfile key = w.counts;
        for (std::size_t j = 0; j < key.size(); ++j)
          if (r(j, k) == 0.0)
            key[j] = 0;
        auto it = memo[k].find(key);
        if (it == memo[k].end())
          it = memo[k].emplace(key, hypoexp_pdf(key, k, r, profiles.rate, grids[k])).first;
        margin[k] = &it->second;
      }
      // row-major walk over the Cartesian product, last margin fastest
      std::fill(index.begin(), index.end(), 0);
      for (std::size_t cell = 0; cell < cells; ++cell) {
        double v = w.rho;
        for (std::size_t k = 0; k < m; ++k)
          v *= (*margin[k])[index[k]];
        out.values[cell] += v;
        for (std::size_t k = m; k-- > 0;) {
          if (++index[k] < grids[k].size())
            break;
          index[k] = 0;
        }
      }
    }
  return out;
}

MphDensity mph_density(const std::vector<double> &x, const MphProfiles &profiles,
                       const RewardMatrix &r) {
  std::vector<std::vector<double>> grids;
  for (double v : x)
    grids.push_back({v});
  return mph_density_grid(grids, profiles, r);
}

namespace {

int draw_state(const RowVector &weights, double u) {
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    u -= weights(j);
    if (u < 0.0)
      return static_cast<int>(j);
  }
  return -1;
}

} // namespace

MphSample mph_simulate(const ProbVector &pi, const IntensityFunction &f, const RewardMatrix &r,
                       MphSimulationMode mode, std::size_t replications, std::uint64_t seed,
                       const std::optional<QSequence> &qs, std::size_t horizon) {
  const std::size_t p = f.dim();
  if (static_cast<std::size_t>(pi.size()) != p || r.states() != p)
    throw DimensionError("mph_simulate: pi, intensity and rewards must share the state count");
  if (replications == 0)
    throw InvalidInput("mph_simulate: need at least one replication");
  double rate = 0.0;
  if (mode == MphSimulationMode::exact) {
    rate = f.bound();
    if (!(rate > 0.0) || !std::isfinite(rate))
      throw PreconditionError("exact simulation needs a finite positive bound lambda0");
  } else {
    if (!qs)
      throw PreconditionError("approximate simulation needs a Q sequence");
    if (qs->dim() != p)
      throw DimensionError("Q sequence dimension does not match");
    rate = qs->rate();
  }

  const std::size_t m = r.margins();
  MphSample out;
  out.replications = replications;
  RowVector kernel(static_cast<Eigen::Index>(p));
  for (std::size_t rep = 0; rep < replications; ++rep) {
    CounterRng rng(seed, rep);
    std::vector<double> y(m, 0.0);
    int state = draw_state(pi.values(), rng.uniform());
    double t = 0.0;
    bool alive = state >= 0;
    std::size_t step = 0;
    while (alive && step < horizon) {
      ++step;
      const double dt = rng.exponential(rate);
      for (std::size_t k = 0; k < m; ++k)
        y[k] += r(static_cast<std::size_t>(state), k) * dt;
      t += dt;
      if (mode == MphSimulationMode::exact) {
        kernel = f(t).row(state) / rate;
        kernel(state) += 1.0;
      } else {
        kernel = qs->at(step).row(state);
        if (kernel.minCoeff() < 0.0)
          throw NumericalError("Q_" + std::to_string(step) +
                               " has negative entries; the chain cannot be sampled");
      }
      state = draw_state(kernel, rng.uniform());
      alive = state >= 0;
    }
    if (alive) {
      ++out.excluded;
      continue;
    }
    out.rows.push_back(std::move(y));
  }
  return out;
}

} // namespace mjpa
