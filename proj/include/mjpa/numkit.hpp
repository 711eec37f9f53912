#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace mjpa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Sub-probability row vector: entries >= 0, total mass <= 1 + 1e-12.
class ProbVector {
public:
  ProbVector() = default;
  explicit ProbVector(RowVector v);

  const RowVector &values() const { return v_; }
  Eigen::Index size() const { return v_.size(); }
  double operator[](Eigen::Index i) const { return v_(i); }
  double mass() const { return v_.sum(); }

private:
  RowVector v_;
};

bool all_finite(const Matrix &a);

/// True when off-diagonals are >= -eps and row sums are <= eps.
bool is_subgenerator(const Matrix &a, double eps = 1e-12);

/// e^{A t} with entrywise error <= tol.
///
/// Sub-generators go through uniformization (Poisson-weighted powers of
/// I + A/theta, combined with squaring when theta*t is large), which keeps
/// the result entrywise nonnegative and sub-stochastic. Anything else uses
/// scaling-and-squaring around a Taylor core.
Matrix mat_exp(const Matrix &a, double t, double tol = 1e-12);

double log_poisson_pmf(double lambda, std::uint64_t m);

/// log of rate^ell t^(ell-1) e^(-rate t) / (ell-1)!
double erlang_logpdf(std::uint64_t ell, double rate, double t);

/// Smallest K with sum_{m<=K} Poi_lambda(m) >= 1 - tail_tol.
std::uint64_t poisson_truncation(double lambda, double tail_tol);

/// P(Erlang(ell, rate) <= t), i.e. the regularized lower incomplete gamma.
double erlang_cdf(std::uint64_t ell, double rate, double t);

/// Regularized lower incomplete gamma P(a, x) for real a > 0.
double gamma_p(double a, double x);

/// Inverse of gamma_p in x.
double gamma_p_inv(double a, double p);

/// Calls visit(j, Poi_lambda(j)) for j in [0, j_max], starting at the mode and
/// moving outward with the ratio recurrences; each side stops once the pmf
/// falls below 1e-18 of its peak.
template <class Visit> void poisson_sweep(double lambda, std::uint64_t j_max, Visit &&visit) {
  const auto mode =
      std::min<std::uint64_t>(static_cast<std::uint64_t>(std::floor(lambda)), j_max);
  const double peak = std::exp(log_poisson_pmf(lambda, mode));
  const double floor_value = 1e-18 * peak;
  double pmf = peak;
  for (std::uint64_t j = mode; j <= j_max; ++j) {
    visit(j, pmf);
    pmf *= lambda / static_cast<double>(j + 1);
    if (pmf < floor_value)
      break;
  }
  pmf = peak;
  for (std::uint64_t j = mode; j > 0; --j) {
    pmf *= static_cast<double>(j) / lambda;
    if (pmf < floor_value)
      break;
    visit(j - 1, pmf);
  }
}

} // namespace mjpa
