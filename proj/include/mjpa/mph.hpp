#pragma once

#include "mjpa/model.hpp"
#include "mjpa/numkit.hpp"
#include "mjpa/qseq.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace mjpa {

/// Nonnegative p x m reward rates r(i, k).
class RewardMatrix {
public:
  explicit RewardMatrix(Matrix r);

  const Matrix &values() const { return r_; }
  std::size_t states() const { return static_cast<std::size_t>(r_.rows()); }
  std::size_t margins() const { return static_cast<std::size_t>(r_.cols()); }
  double operator()(std::size_t i, std::size_t k) const {
    return r_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
  }

private:
  Matrix r_;
};

/// Visit counts (i_1, ..., i_p), |i| >= 1.
using VisitProfile = std::vector<std::uint32_t>;

std::uint32_t profile_size(const VisitProfile &i);

struct ProfileWeight {
  VisitProfile counts;
  RowVector alpha; // alpha_{i; j} over states j
  double rho = 0.0; // sum_j alpha_{i; j} beta_{|i|; j}
};

struct MphProfiles {
  double rate = 0.0;
  std::size_t states = 0;
  /// levels[l - 1] holds every profile with |i| = l, in lexicographic order.
  std::vector<std::vector<ProfileWeight>> levels;
  /// 1 - sum of rho over all levels (initial defect plus surviving mass).
  double defect = 1.0;

  std::size_t depth() const { return levels.size(); }
  std::size_t profile_count() const;
};

inline constexpr double kDefaultProfileCapacity = 1e7;

/// alpha_{e_h; j} = pi_j [h = j];
/// alpha_{i + e_j; j} = sum_h alpha_{i; h} [Q_{|i|}]_{hj}, level by level to depth D.
/// Throws CapacityError when C(D + p - 1, p - 1) * p exceeds `capacity`.
MphProfiles alpha_recursion(const ProbVector &pi, const QSequence &qs, std::size_t D,
                            double capacity = kDefaultProfileCapacity);

/// rho_i = sum_j alpha_{i; j} (1 - sum_a [Q_{|i|}]_{j a}).
double mixture_weight(const ProfileWeight &w, const QSequence &qs);

/// Density at x of sum_j Erlang(i_j, n / r(j, k)) over states with i_j > 0
/// and r(j, k) > 0, from the bidiagonal stage generator and mat_exp.
/// Throws DegenerateMargin when no state contributes (point mass at 0).
double hypoexp_pdf(const VisitProfile &i, std::size_t k, const RewardMatrix &r, double n,
                   double x);

/// Same density on a list of points via uniformization of the stage chain:
/// the scalars e_1 P^j t are shared by every x.
std::vector<double> hypoexp_pdf(const VisitProfile &i, std::size_t k, const RewardMatrix &r,
                                double n, const std::vector<double> &xs);

/// Mean of margin k under the mixture: sum_i rho_i sum_j i_j r(j, k) / n.
double mph_mixture_mean(const MphProfiles &profiles, const RewardMatrix &r, std::size_t k);

struct MphDensity {
  /// Density values; for a grid, row-major over the Cartesian product of the
  /// per-margin grids (last margin fastest).
  std::vector<double> values;
  /// Profiles with a degenerate margin are left out of the continuous
  /// density; their total weight is reported here.
  double excluded_mass = 0.0;
  std::size_t excluded_profiles = 0;
  double defect = 0.0;
};

MphDensity mph_density(const std::vector<double> &x, const MphProfiles &profiles,
                       const RewardMatrix &r);
MphDensity mph_density_grid(const std::vector<std::vector<double>> &grids,
                            const MphProfiles &profiles, const RewardMatrix &r);

enum class MphSimulationMode { exact, approximate };

struct MphSample {
  /// replications x margins, paths that hit the horizon are dropped.
  std::vector<std::vector<double>> rows;
  std::size_t excluded = 0;
  std::size_t replications = 0;
};

/// Reward integrals Y_k = int_0^tau r(J(t), k) dt along simulated paths.
/// exact: J by uniformization at its bound lambda0 (any intensity).
/// approximate: the rate-n chain with kernels Q_l from `qs`, i.e. a draw from
/// the mixture representation. Paths still alive after `horizon` jumps are
/// excluded.
MphSample mph_simulate(const ProbVector &pi, const IntensityFunction &f, const RewardMatrix &r,
                       MphSimulationMode mode, std::size_t replications, std::uint64_t seed,
                       const std::optional<QSequence> &qs = std::nullopt,
                       std::size_t horizon = 1000000);

} // namespace mjpa
