#include "mjpa/numkit.hpp"

#include "mjpa/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mjpa {

ProbVector::ProbVector(RowVector v) : v_(std::move(v)) {
  for (Eigen::Index i = 0; i < v_.size(); ++i) {
    if (!std::isfinite(v_(i)) || v_(i) < 0.0)
      throw InvalidInput("probability vector entry " + std::to_string(i) +
                         " is negative or not finite");
  }
  if (v_.sum() > 1.0 + 1e-12)
    throw InvalidInput("probability vector sums to more than 1");
}

bool all_finite(const Matrix &a) { return a.allFinite(); }

bool is_subgenerator(const Matrix &a, double eps) {
  if (a.rows() != a.cols())
    return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j && a(i, j) < -eps)
        return false;
      row += a(i, j);
    }
    if (row > eps)
      return false;
  }
  return true;
}

namespace {

void check_square_finite(const Matrix &a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw DimensionError("mat_exp: matrix must be square and nonempty");
  if (!a.allFinite())
    throw InvalidInput("mat_exp: matrix has non-finite entries");
}

Matrix square_times(Matrix x, int s) {
  for (int i = 0; i < s; ++i)
    x = (x * x).eval();
  return x;
}

Matrix exp_uniformized(const Matrix &a, double t, double tol) {
  const Eigen::Index p = a.rows();
  const double rate = a.diagonal().cwiseAbs().maxCoeff();
  if (rate == 0.0)
    return Matrix::Identity(p, p);

  const double theta = rate * t;
  int s = 0;
  while (std::ldexp(theta, -s) > 1.0)
    ++s;
  const double piece = std::ldexp(theta, -s);
  const double piece_tol = std::ldexp(tol, -(s + 1));

  const Matrix b = Matrix::Identity(p, p) + a / rate;
  const auto kmax = poisson_truncation(piece, std::min(piece_tol, 0.05));

  Matrix term = Matrix::Identity(p, p);
  Matrix acc = std::exp(-piece) * term;
  double log_w = -piece;
  for (std::uint64_t k = 1; k <= kmax; ++k) {
    term = (term * b).eval();
    log_w += std::log(piece) - std::log(static_cast<double>(k));
    acc.noalias() += std::exp(log_w) * term;
  }
  return square_times(std::move(acc), s);
}

Matrix exp_taylor(const Matrix &a, double t) {
  const Eigen::Index p = a.rows();
  const Matrix x0 = a * t;
  const double norm = x0.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  while (std::ldexp(norm, -s) > 0.5)
    ++s;
  const Matrix x = std::ldexp(1.0, -s) * x0;

  Matrix term = Matrix::Identity(p, p);
  Matrix acc = term;
  for (int k = 1; k < 64; ++k) {
    term = (term * x).eval() / static_cast<double>(k);
    acc += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-18 * acc.cwiseAbs().maxCoeff())
      break;
  }
  return square_times(std::move(acc), s);
}

} // namespace

Matrix mat_exp(const Matrix &a, double t, double tol) {
  check_square_finite(a);
  if (!(t >= 0.0) || !std::isfinite(t))
    throw InvalidInput("mat_exp: t must be a finite nonnegative number");
  if (!(tol > 0.0 && tol <= 1e-3))
    throw InvalidInput("mat_exp: tol must lie in (0, 1e-3]");
  if (t == 0.0)
    return Matrix::Identity(a.rows(), a.cols());
  if (is_subgenerator(a, 1e-14 * std::max(1.0, a.cwiseAbs().maxCoeff())))
    return exp_uniformized(a, t, tol);
  return exp_taylor(a, t);
}

namespace {

// Loader's saddle-point evaluation: log(m!) = stirling part + stirlerr(m),
// and the Poisson exponent m log(m/lambda) + lambda - m computed by bd0
// without cancellation.
double stirlerr(double n) {
  constexpr double s0 = 1.0 / 12.0, s1 = 1.0 / 360.0, s2 = 1.0 / 1260.0, s3 = 1.0 / 1680.0,
                   s4 = 1.0 / 1188.0;
  if (n <= 15.0)
    return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - 0.5 * std::log(2.0 * std::numbers::pi);
  const double nn = n * n;
  if (n > 500.0)
    return (s0 - s1 / nn) / n;
  if (n > 80.0)
    return (s0 - (s1 - s2 / nn) / nn) / n;
  if (n > 35.0)
    return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

double bd0(double x, double np) {
  if (std::abs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double next = s + ej / (2 * j + 1);
      if (next == s)
        return next;
      s = next;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

} // namespace

double log_poisson_pmf(double lambda, std::uint64_t m) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidInput("log_poisson_pmf: lambda must be finite and >= 0");
  if (m == 0)
    return -lambda;
  if (lambda == 0.0)
    return -INFINITY;
  const double md = static_cast<double>(m);
  return -stirlerr(md) - bd0(md, lambda) - 0.5 * std::log(2.0 * std::numbers::pi * md);
}

double erlang_logpdf(std::uint64_t ell, double rate, double t) {
  if (ell == 0)
    throw InvalidInput("erlang_logpdf: shape must be >= 1");
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw InvalidInput("erlang_logpdf: rate must be positive");
  if (!(t >= 0.0))
    throw InvalidInput("erlang_logpdf: t must be >= 0");
  // rate^l t^(l-1) e^(-rate t) / (l-1)! = rate * Poi_{rate t}(l - 1)
  return std::log(rate) + log_poisson_pmf(rate * t, ell - 1);
}

std::uint64_t poisson_truncation(double lambda, double tail_tol) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidInput("poisson_truncation: lambda must be finite and >= 0");
  if (!(tail_tol > 0.0 && tail_tol < 1.0))
    throw InvalidInput("poisson_truncation: tail_tol must lie in (0, 1)");
  if (lambda == 0.0)
    return 0;

  const double target = 1.0 - tail_tol;
  const double log_lambda = std::log(lambda);
  double log_pmf = -lambda;
  double cum = std::exp(log_pmf);
  std::uint64_t m = 0;
  while (cum < target) {
    // Once past the mode the remaining tail is dominated by a geometric
    // series; this catches tolerances below the resolution of `cum`.
    const double md = static_cast<double>(m);
    if (md > lambda) {
      const double ratio = lambda / (md + 2.0);
      const double bound = std::exp(log_pmf) * (lambda / (md + 1.0)) / (1.0 - ratio);
      if (bound < tail_tol)
        break;
    }
    ++m;
    log_pmf += log_lambda - std::log(static_cast<double>(m));
    cum += std::exp(log_pmf);
  }
  return m;
}

double gamma_p(double a, double x) {
  if (x <= 0.0)
    return 0.0;
  if (std::isinf(x))
    return 1.0;
  return boost::math::gamma_p(a, x);
}

double gamma_p_inv(double a, double p) { return boost::math::gamma_p_inv(a, p); }

double erlang_cdf(std::uint64_t ell, double rate, double t) {
  if (ell == 0)
    throw InvalidInput("erlang_cdf: shape must be >= 1");
  return gamma_p(static_cast<double>(ell), rate * t);
}

} // namespace mjpa
