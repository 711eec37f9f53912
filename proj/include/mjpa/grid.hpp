#pragma once

#include "mjpa/model.hpp"
#include "mjpa/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace mjpa {

/// Arrival times of a rate-n Poisson process; chi_0 = 0 is implicit, so
/// times[l-1] is the l-th arrival.
struct PoissonGrid {
  double rate = 0.0;
  std::vector<double> times;

  std::size_t size() const { return times.size(); }
  /// l-th arrival, l >= 0 (l = 0 gives 0).
  double at(std::size_t l) const { return l == 0 ? 0.0 : times.at(l - 1); }
};

PoissonGrid sample_grid(double n, std::size_t count, CounterRng &rng);
PoissonGrid sample_grid(double n, std::size_t count, std::uint64_t seed,
                        std::uint64_t stream = 0);

/// Cadlag path: state holds on [times[k], times[k+1]). States are 0-based;
/// kCemetery marks absorption.
struct PathRecord {
  static constexpr int kCemetery = -1;

  int initial_state = 0;
  std::vector<double> times;
  std::vector<int> states;
  // grid index at which each jump happened
  std::vector<std::size_t> epochs;

  bool absorbed() const {
    return initial_state == kCemetery || (!states.empty() && states.back() == kCemetery);
  }
  int state_at(double t) const;
};

struct CoupledPaths {
  PathRecord j;
  PathRecord jn;
  /// State of J at chi_0, chi_1, ... up to absorption or grid exhaustion.
  std::vector<int> embedded;
  /// gamma: index with tau = chi_gamma and tau_n = theta_gamma.
  std::optional<std::size_t> absorption_index;
  bool grid_exhausted = false;
};

/// Draws J(0) ~ alpha (sub-probability remainder starts in the cemetery) and
/// runs the thinned uniformization of J on the chi grid: at each epoch the
/// kernel I + Lambda(chi_l)/lambda0 is consulted with probability lambda0/n,
/// otherwise the state is held. J_n repeats the embedded states on theta.
CoupledPaths simulate_coupled(const IntensityFunction &f, const ProbVector &alpha,
                              const PoissonGrid &chi, const PoissonGrid &theta,
                              std::uint64_t seed, std::uint64_t stream = 0);

/// Embedded chain of the uniformization at the grid epochs only.
std::vector<int> simulate_embedded(const IntensityFunction &f, const ProbVector &alpha,
                                   const PoissonGrid &chi, CounterRng &rng);

/// max_{1 <= l <= L} |theta_l - chi_l|, which equals sup_s |Delta_n(s) - s|.
double discrepancy(const PoissonGrid &chi, const PoissonGrid &theta, std::size_t L);

struct RateRow {
  double n;
  double epsilon;
  double q50;
  double q90;
  double q99;
  double normalizer;
};

/// For each n: `replications` independent grid pairs of length floor(n^(1+eps)),
/// discrepancy divided by (log n) n^(-1/2+eps/2), and its quantiles.
std::vector<RateRow> rate_experiment(const std::vector<double> &n_values, double epsilon,
                                     std::size_t replications, std::uint64_t seed);

/// Type-7 (linear interpolation) sample quantile; sorts a copy.
double quantile(std::vector<double> values, double q);

} // namespace mjpa
