#pragma once

#include "mjpa/model.hpp"
#include "mjpa/numkit.hpp"
#include "mjpa/qseq.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mjpa {

struct TransitionResult {
  Matrix P;
  // Poisson mass dropped by the two truncations, 1 - A_s * A_t.
  double truncation_defect = 0.0;
  std::uint64_t Ks = 0;
  std::uint64_t Kt = 0;
};

/// sum_k sum_l Poi_{ns}(k) Poi_{n(t-s)}(l) Q_{k+1} ... Q_{k+l}, truncated at
/// k <= K_s and l <= K_t with tail_tol split evenly between the two sums.
TransitionResult transition_series(const QSequence &qs, double s, double t,
                                   double tail_tol = 1e-12);

/// Same series for several end times sharing one start time; the running
/// products are reused across the t values.
std::vector<TransitionResult> transition_series(const QSequence &qs, double s,
                                                const std::vector<double> &ts,
                                                double tail_tol = 1e-12);

/// Reference P(s, t): product of midpoint matrix exponentials over equal
/// panels, halving the panel width (with Richardson extrapolation) until two
/// refinements differ by less than step_tol entrywise.
Matrix product_integral(const IntensityFunction &f, double s, double t, double step_tol = 1e-10);

/// P(times[0], times[i]) for an increasing time list, refining each interval
/// to step_tol separately and chaining the results.
std::vector<Matrix> product_integral_path(const IntensityFunction &f,
                                          const std::vector<double> &times,
                                          double step_tol = 1e-10);

struct ErrorScanRow {
  double n;
  QVariant variant;
  double sup_error;
  double T;
  double tail_tol;
};

/// For each n, max over s < t on an equispaced (points + 1)-grid of [0, T] of
/// the max-row-sum norm of P^(n)(s, t) - P(s, t). The conditional variant
/// samples its grid from `seed`.
std::vector<ErrorScanRow> unconditional_error_scan(const IntensityFunction &f,
                                                   const std::vector<double> &n_values, double T,
                                                   QVariant variant, double tail_tol = 1e-12,
                                                   std::size_t points = 4,
                                                   std::uint64_t seed = 0,
                                                   QPolicy policy = QPolicy::strict);

} // namespace mjpa
