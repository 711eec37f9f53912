#include "mjpa/qseq.hpp"

#include "mjpa/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mjpa {

std::string to_string(QVariant v) {
  switch (v) {
  case QVariant::conditional:
    return "conditional";
  case QVariant::hat:
    return "hat";
  case QVariant::tilde:
    return "tilde";
  case QVariant::scalar_hazard:
    return "scalar_hazard";
  case QVariant::custom:
    return "custom";
  }
  return "unknown";
}

QVariant q_variant_from_string(const std::string &name) {
  if (name == "conditional")
    return QVariant::conditional;
  if (name == "hat")
    return QVariant::hat;
  if (name == "tilde")
    return QVariant::tilde;
  throw InvalidInput("unknown variant '" + name + "' (expected conditional, hat or tilde)");
}

Matrix one_step_matrix(const Matrix &lam, double n) {
  Matrix q(lam.rows(), lam.cols());
  for (Eigen::Index i = 0; i < lam.rows(); ++i)
    for (Eigen::Index j = 0; j < lam.cols(); ++j)
      q(i, j) = (i == j ? 1.0 : 0.0) + lam(i, j) / n;
  return q;
}

namespace {

constexpr double kQTol = 1e-12;

void require_rate(double n) {
  if (!(n > 0.0) || !std::isfinite(n))
    throw InvalidInput("rate n must be positive and finite");
}

void require_index(std::size_t ell) {
  if (ell == 0)
    throw InvalidInput("Q-sequence indices start at 1");
}

double gamma_q(double a, double x) {
  if (x <= 0.0)
    return 1.0;
  if (std::isinf(x))
    return 0.0;
  return boost::math::gamma_q(a, x);
}

// exp(log_a) * p without forming an overflowing exp(log_a) when p is tiny.
double scaled(double log_a, double p) {
  if (p <= 0.0)
    return 0.0;
  return std::exp(log_a + std::log(p));
}

double gompertz_factor(double beta, double cap, double n, std::size_t ell) {
  if (!(n > beta))
    throw DomainError("Gompertz closed form needs n > beta (the Erlang expectation diverges)");
  const double l = static_cast<double>(ell);
  const double log_growth = l * std::log(n / (n - beta));
  if (std::isinf(cap))
    return std::exp(log_growth);
  if (cap <= 1.0)
    return cap;
  // E[e^{beta X}; X < c] + cap P(X >= c), c = log(cap) / beta
  const double c = std::log(cap) / beta;
  return scaled(log_growth, gamma_p(l, (n - beta) * c)) + cap * gamma_q(l, n * c);
}

double weibull_factor(double beta, double cap, double n, std::size_t ell) {
  if (beta == 1.0)
    return 1.0;
  const double l = static_cast<double>(ell);
  const double log_g =
      std::log(beta) + (1.0 - beta) * std::log(n) + std::lgamma(l + beta - 1.0) - std::lgamma(l);
  if (std::isinf(cap))
    return std::exp(log_g);
  // lambda(s) = cap at s = c
  const double c = std::pow(cap / beta, 1.0 / (beta - 1.0));
  if (beta > 1.0)
    return scaled(log_g, gamma_p(l + beta - 1.0, n * c)) + cap * gamma_q(l, n * c);
  return cap * gamma_p(l, n * c) + scaled(log_g, gamma_q(l + beta - 1.0, n * c));
}

double table_factor(const SeparableSubIntensity &sub, double n, std::size_t ell) {
  const auto &table = sub.table();
  const double cap = sub.cap();
  double total = 0.0;
  double prev_cdf = 0.0;
  // value table[k].second holds on (t_k, t_{k+1}] (and on [0, t_1] for k = 0)
  for (std::size_t k = 0; k < table.size(); ++k) {
    const double next_cdf =
        k + 1 < table.size() ? erlang_cdf(ell, n, std::max(0.0, table[k + 1].first)) : 1.0;
    total += std::min(table[k].second, cap) * (next_cdf - prev_cdf);
    prev_cdf = next_cdf;
  }
  return total;
}

double erlang_weight(double n, std::size_t ell, double s) {
  return std::exp(erlang_logpdf(ell, n, s));
}

template <class Value, class Eval, class Norm>
Value simpson_doubling(Eval eval, Norm norm, double upper, double rel_tol, Value zero) {
  // Nodes are reused across doublings: f_even holds the previous nodes.
  std::size_t panels = 64;
  double h = upper / static_cast<double>(panels);
  Value ends = eval(0.0) + eval(upper);
  Value odd = zero;
  Value even = zero;
  for (std::size_t k = 1; k < panels; ++k) {
    if (k % 2 == 1)
      odd = odd + eval(h * static_cast<double>(k));
    else
      even = even + eval(h * static_cast<double>(k));
  }
  Value current = (ends + 4.0 * odd + 2.0 * even) * (h / 3.0);
  for (int round = 0; round < 22; ++round) {
    panels *= 2;
    h /= 2.0;
    even = even + odd;
    odd = zero;
    for (std::size_t k = 1; k < panels; k += 2)
      odd = odd + eval(h * static_cast<double>(k));
    Value next = (ends + 4.0 * odd + 2.0 * even) * (h / 3.0);
    const double change = norm(Value(next - current));
    const double scale = std::max(1.0, norm(next));
    current = std::move(next);
    if (change < rel_tol * scale)
      return current;
  }
  throw NumericalError("Erlang quadrature did not converge");
}

} // namespace

double erlang_expectation(const std::function<double(double)> &g, double n, std::size_t ell,
                          double rel_tol) {
  require_rate(n);
  require_index(ell);
  const double upper = gamma_p_inv(static_cast<double>(ell), 1.0 - 1e-12) / n;
  auto eval = [&](double s) {
    const double w = erlang_weight(n, ell, s);
    return w == 0.0 ? 0.0 : g(s) * w;
  };
  return simpson_doubling<double>(eval, [](double v) { return std::abs(v); }, upper, rel_tol,
                                  0.0);
}

Matrix erlang_expectation(const std::function<Matrix(double)> &g, std::size_t dim, double n,
                          std::size_t ell, double rel_tol) {
  require_rate(n);
  require_index(ell);
  const auto p = static_cast<Eigen::Index>(dim);
  const double upper = gamma_p_inv(static_cast<double>(ell), 1.0 - 1e-12) / n;
  auto eval = [&](double s) -> Matrix {
    const double w = erlang_weight(n, ell, s);
    if (w == 0.0)
      return Matrix::Zero(p, p);
    return g(s) * w;
  };
  return simpson_doubling<Matrix>(
      eval, [](const Matrix &m) { return m.cwiseAbs().maxCoeff(); }, upper, rel_tol,
      Matrix::Zero(p, p));
}

double tilde_factor(const SeparableSubIntensity &sub, double n, std::size_t ell) {
  require_rate(n);
  require_index(ell);
  switch (sub.family()) {
  case HazardFamily::constant:
    return 1.0;
  case HazardFamily::gompertz:
    return gompertz_factor(sub.beta(), sub.cap(), n, ell);
  case HazardFamily::weibull:
    return weibull_factor(sub.beta(), sub.cap(), n, ell);
  case HazardFamily::table:
    return table_factor(sub, n, ell);
  case HazardFamily::custom:
    return erlang_expectation([&](double s) { return sub.rate(s); }, n, ell);
  }
  return 0.0;
}

Matrix q_conditional(const IntensityFunction &f, const PoissonGrid &grid, std::size_t ell) {
  require_index(ell);
  const double n = grid.rate;
  require_rate(n);
  if (n < f.bound() * (1.0 - 1e-12))
    throw PreconditionError("conditional Q needs n >= lambda0");
  if (ell > grid.size())
    throw PreconditionError("Q index " + std::to_string(ell) + " exceeds grid length " +
                            std::to_string(grid.size()));
  return one_step_matrix(f(grid.at(ell)), n);
}

Matrix q_hat(const IntensityFunction &f, double n, std::size_t ell) {
  require_rate(n);
  require_index(ell);
  return one_step_matrix(f(static_cast<double>(ell) / n), n);
}

Matrix q_tilde(const IntensityFunction &f, double n, std::size_t ell) {
  require_rate(n);
  require_index(ell);
  if (const Matrix *c = f.constant_value())
    return one_step_matrix(*c, n);
  if (const SeparableSubIntensity *sub = f.separable())
    return one_step_matrix(tilde_factor(*sub, n, ell) * sub->base(), n);
  return one_step_matrix(erlang_expectation([&](double s) { return f(s); }, f.dim(), n, ell),
                         n);
}

bool check_substochastic(const Matrix &q, std::size_t ell, QPolicy policy) {
  bool ok = q.allFinite();
  for (Eigen::Index i = 0; ok && i < q.rows(); ++i) {
    for (Eigen::Index j = 0; j < q.cols(); ++j)
      if (q(i, j) < -kQTol || q(i, j) > 1.0 + kQTol)
        ok = false;
    if (q.row(i).sum() > 1.0 + kQTol)
      ok = false;
  }
  if (!ok && policy == QPolicy::strict) {
    std::ostringstream os;
    os << "Q_" << ell << " is not substochastic (min entry " << q.minCoeff()
       << ", max row sum " << q.rowwise().sum().maxCoeff()
       << "); increase n or cap the intensity";
    throw NumericalError(os.str());
  }
  return ok;
}

CumulativeHazardStep nelson_aalen(std::vector<double> sample) {
  if (sample.empty())
    throw InvalidInput("nelson_aalen: empty sample");
  std::sort(sample.begin(), sample.end());
  const double big_n = static_cast<double>(sample.size());
  CumulativeHazardStep h;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!(sample[i] > 0.0) || !std::isfinite(sample[i]))
      throw InvalidInput("hazard data must be positive and finite");
    const double jump = 1.0 / (big_n - static_cast<double>(i));
    if (!h.times.empty() && h.times.back() == sample[i])
      h.jumps.back() += jump;
    else {
      h.times.push_back(sample[i]);
      h.jumps.push_back(jump);
    }
  }
  return h;
}

CumulativeHazardStep neg_log_ecdf_hazard(std::vector<double> sample) {
  if (sample.empty())
    throw InvalidInput("neg_log_ecdf_hazard: empty sample");
  std::sort(sample.begin(), sample.end());
  const double big_n = static_cast<double>(sample.size());
  CumulativeHazardStep h;
  std::size_t i = 0;
  double survivors = big_n;
  while (i < sample.size()) {
    const double x = sample[i];
    if (!(x > 0.0) || !std::isfinite(x))
      throw InvalidInput("hazard data must be positive and finite");
    std::size_t j = i;
    while (j < sample.size() && sample[j] == x)
      ++j;
    const double after = big_n - static_cast<double>(j);
    if (after == 0.0)
      break; // maximal observation: -log(0)
    h.times.push_back(x);
    h.jumps.push_back(std::log(survivors) - std::log(after));
    survivors = after;
    i = j;
  }
  if (h.times.empty())
    throw InvalidInput("neg_log_ecdf_hazard: estimator is degenerate (all observations equal)");
  return h;
}

namespace {

ScalarQ clamp_q(double v) {
  if (v < 0.0)
    return {0.0, true};
  if (v > 1.0)
    return {1.0, true};
  return {v, false};
}

} // namespace

ScalarQ q_scalar_from_hazard(const std::function<double(double)> &h, double n, std::size_t ell) {
  return clamp_q(1.0 - erlang_expectation(h, n, ell) / n);
}

ScalarQ q_scalar_from_hazard(const CumulativeHazardStep &hazard, double n, std::size_t ell) {
  require_rate(n);
  require_index(ell);
  if (hazard.times.empty())
    throw InvalidInput("q_scalar_from_hazard: empty hazard estimator");
  const double l = static_cast<double>(ell);
  // kernel (ns)^(l-1)/(l-1)! e^{-ns} peaks at ns = l-1 with spread sqrt(l);
  // outside +-40 spreads it is below 1e-300 relative.
  const double spread = 40.0 * std::sqrt(l) + 40.0;
  const double lo = std::max(0.0, (l - 1.0 - spread) / n);
  const double hi = (l - 1.0 + spread) / n;
  auto first = std::lower_bound(hazard.times.begin(), hazard.times.end(), lo);
  auto last = std::upper_bound(hazard.times.begin(), hazard.times.end(), hi);
  double total = 0.0;
  const double log_fact = std::lgamma(l);
  for (auto it = first; it != last; ++it) {
    const double s = *it;
    const double k =
        ell == 1 ? std::exp(-n * s) : std::exp((l - 1.0) * std::log(n * s) - log_fact - n * s);
    total += k * hazard.jumps[static_cast<std::size_t>(it - hazard.times.begin())];
  }
  return clamp_q(1.0 - total);
}

QSequence::QSequence(QVariant variant, double n, std::size_t dim, Generator gen,
                     std::optional<std::size_t> max_index, QPolicy policy)
    : variant_(variant), n_(n), dim_(dim), gen_(std::move(gen)), max_index_(max_index),
      policy_(policy), memo_(std::make_shared<Memo>()) {
  require_rate(n);
}

QSequence QSequence::conditional(IntensityFunction f, PoissonGrid grid, QPolicy policy) {
  const double n = grid.rate;
  if (n < f.bound() * (1.0 - 1e-12))
    throw PreconditionError("conditional Q-sequence needs n >= lambda0 (n = " +
                            std::to_string(n) + ", lambda0 = " + std::to_string(f.bound()) +
                            ")");
  const std::size_t len = grid.size();
  const std::size_t dim = f.dim();
  return QSequence(
      QVariant::conditional, n, dim,
      [f = std::move(f), grid = std::move(grid)](std::size_t ell) {
        return q_conditional(f, grid, ell);
      },
      len, policy);
}

QSequence QSequence::hat(IntensityFunction f, double n, QPolicy policy) {
  const std::size_t dim = f.dim();
  return QSequence(
      QVariant::hat, n, dim, [f = std::move(f), n](std::size_t ell) { return q_hat(f, n, ell); },
      std::nullopt, policy);
}

QSequence QSequence::tilde(IntensityFunction f, double n, QPolicy policy) {
  if (const auto *sub = f.separable();
      sub && sub->family() == HazardFamily::gompertz && !(n > sub->beta()))
    throw DomainError("Gompertz tilde sequence needs n > beta");
  const std::size_t dim = f.dim();
  return QSequence(
      QVariant::tilde, n, dim,
      [f = std::move(f), n](std::size_t ell) { return q_tilde(f, n, ell); }, std::nullopt,
      policy);
}

QSequence QSequence::scalar_hazard(CumulativeHazardStep hazard, double n) {
  if (hazard.times.empty())
    throw InvalidInput("scalar hazard sequence needs a nonempty estimator");
  QSequence q(QVariant::scalar_hazard, n, 1, {}, std::nullopt, QPolicy::strict);
  Memo *memo = q.memo_.get();
  q.gen_ = [hazard = std::move(hazard), n, memo](std::size_t ell) {
    const auto r = q_scalar_from_hazard(hazard, n, ell);
    if (r.clamped)
      ++memo->clamped;
    return Matrix::Constant(1, 1, r.value);
  };
  return q;
}

QSequence QSequence::scalar_hazard(std::function<double(double)> h, double n) {
  QSequence q(QVariant::scalar_hazard, n, 1, {}, std::nullopt, QPolicy::strict);
  Memo *memo = q.memo_.get();
  q.gen_ = [h = std::move(h), n, memo](std::size_t ell) {
    const auto r = q_scalar_from_hazard(h, n, ell);
    if (r.clamped)
      ++memo->clamped;
    return Matrix::Constant(1, 1, r.value);
  };
  return q;
}

QSequence QSequence::from_generator(QVariant variant, double n, std::size_t dim, Generator gen,
                                    std::optional<std::size_t> max_index, QPolicy policy) {
  if (!gen)
    throw InvalidInput("Q-sequence generator is empty");
  return QSequence(variant, n, dim, std::move(gen), max_index, policy);
}

const Matrix &QSequence::at(std::size_t ell) const {
  require_index(ell);
  if (max_index_ && ell > *max_index_)
    throw PreconditionError("Q index " + std::to_string(ell) + " exceeds the available " +
                            std::to_string(*max_index_));
  std::lock_guard<std::mutex> lock(memo_->mutex);
  auto &values = memo_->values;
  while (values.size() < ell) {
    const std::size_t next = values.size() + 1;
    Matrix q = gen_(next);
    if (q.rows() != static_cast<Eigen::Index>(dim_) || q.cols() != static_cast<Eigen::Index>(dim_))
      throw DimensionError("Q-sequence generator returned the wrong shape");
    if (!check_substochastic(q, next, policy_))
      ++memo_->violations;
    values.push_back(std::move(q));
  }
  return values[ell - 1];
}

} // namespace mjpa
