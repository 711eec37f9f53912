#include "mjpa/model.hpp"

#include "mjpa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mjpa {

std::string to_string(HazardFamily f) {
  switch (f) {
  case HazardFamily::constant:
    return "constant";
  case HazardFamily::gompertz:
    return "gompertz";
  case HazardFamily::weibull:
    return "weibull";
  case HazardFamily::table:
    return "table";
  case HazardFamily::custom:
    return "custom";
  }
  return "unknown";
}

HazardFamily hazard_family_from_string(const std::string &name) {
  if (name == "constant")
    return HazardFamily::constant;
  if (name == "gompertz")
    return HazardFamily::gompertz;
  if (name == "weibull")
    return HazardFamily::weibull;
  if (name == "table")
    return HazardFamily::table;
  throw InvalidInput("unknown family '" + name + "'");
}

void require_subintensity(const Matrix &s, const std::string &what) {
  if (s.rows() != s.cols() || s.rows() == 0)
    throw DimensionError(what + " must be a nonempty square matrix");
  if (!s.allFinite())
    throw InvalidInput(what + " has non-finite entries");
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if (s(i, i) > 0.0)
      throw InvalidInput(what + " has a positive diagonal entry in row " +
                         std::to_string(i));
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      if (i != j && s(i, j) < 0.0)
        throw InvalidInput(what + " has a negative off-diagonal entry at (" +
                           std::to_string(i) + "," + std::to_string(j) + ")");
    if (s.row(i).sum() > 1e-12)
      throw InvalidInput(what + " has a positive row sum in row " + std::to_string(i));
  }
}

SeparableSubIntensity::SeparableSubIntensity(Matrix base, HazardFamily family, double beta,
                                             double cap,
                                             std::vector<std::pair<double, double>> table,
                                             std::function<double(double)> custom)
    : base_(std::move(base)), family_(family), beta_(beta), cap_(cap),
      table_(std::move(table)), custom_(std::move(custom)) {
  require_subintensity(base_);
  if (!(cap_ > 0.0))
    throw InvalidInput("cap must be positive");
  if ((family_ == HazardFamily::gompertz || family_ == HazardFamily::weibull) &&
      !(beta_ > 0.0 && std::isfinite(beta_)))
    throw InvalidInput("beta must be a positive finite number");
  if (family_ == HazardFamily::table) {
    if (table_.empty())
      throw InvalidInput("table family needs at least one (t, value) pair");
    std::sort(table_.begin(), table_.end());
    for (const auto &[t, v] : table_)
      if (!(v >= 0.0) || !std::isfinite(v) || !std::isfinite(t))
        throw InvalidInput("table values must be finite and nonnegative");
  }
  if (family_ == HazardFamily::custom && !custom_)
    throw InvalidInput("custom family needs an evaluator");
}

double SeparableSubIntensity::raw_rate(double t) const {
  switch (family_) {
  case HazardFamily::constant:
    return 1.0;
  case HazardFamily::gompertz:
    return std::exp(beta_ * t);
  case HazardFamily::weibull:
    if (beta_ == 1.0)
      return 1.0;
    if (t == 0.0)
      return beta_ < 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return beta_ * std::pow(t, beta_ - 1.0);
  case HazardFamily::table: {
    // first breakpoint with t_k >= t; value of the interval ending there
    auto it = std::lower_bound(table_.begin(), table_.end(), t,
                               [](const auto &e, double x) { return e.first < x; });
    if (it == table_.begin())
      return table_.front().second;
    return std::prev(it)->second;
  }
  case HazardFamily::custom: {
    const double v = custom_(t);
    if (!(v >= 0.0))
      throw InvalidInput("custom hazard returned a negative or NaN value");
    return v;
  }
  }
  return 0.0;
}

std::optional<double> SeparableSubIntensity::rate_sup() const {
  switch (family_) {
  case HazardFamily::constant:
    return 1.0;
  case HazardFamily::weibull:
    if (beta_ == 1.0)
      return 1.0;
    return std::nullopt;
  case HazardFamily::table: {
    double m = 0.0;
    for (const auto &e : table_)
      m = std::max(m, e.second);
    return m;
  }
  default:
    return std::nullopt;
  }
}

double SeparableSubIntensity::bound() const {
  const double diag = base_.diagonal().cwiseAbs().maxCoeff();
  const auto sup = rate_sup();
  return (sup ? std::min(*sup, cap_) : cap_) * diag;
}

IntensityFunction::IntensityFunction(std::size_t dim, Evaluator eval, double bound,
                                     std::optional<double> lipschitz, IntensityKind kind)
    : dim_(dim), eval_(std::move(eval)), bound_(bound), lipschitz_(lipschitz), kind_(kind) {
  if (dim_ == 0)
    throw DimensionError("intensity dimension must be positive");
  if (!(bound_ >= 0.0))
    throw InvalidInput("intensity bound must be nonnegative");
  if (!eval_)
    throw InvalidInput("intensity evaluator is empty");
}

IntensityFunction IntensityFunction::constant(const Matrix &generator) {
  if (generator.rows() != generator.cols() || generator.rows() == 0)
    throw DimensionError("constant intensity must be square");
  if (!generator.allFinite())
    throw InvalidInput("constant intensity has non-finite entries");
  auto value = std::make_shared<const Matrix>(generator);
  IntensityFunction f(static_cast<std::size_t>(generator.rows()),
                      [value](double) { return *value; },
                      generator.diagonal().cwiseAbs().maxCoeff(), 0.0,
                      IntensityKind::constant);
  f.constant_ = std::move(value);
  return f;
}

IntensityFunction IntensityFunction::from_separable(SeparableSubIntensity sub) {
  auto shared = std::make_shared<const SeparableSubIntensity>(std::move(sub));
  std::optional<double> lip;
  if (shared->family() == HazardFamily::gompertz) {
    const double norm = shared->base().cwiseAbs().rowwise().sum().maxCoeff();
    lip = shared->beta() * shared->cap() * norm;
  }
  const bool flat = shared->family() == HazardFamily::constant && shared->cap() >= 1.0;
  const auto kind = flat ? IntensityKind::constant : IntensityKind::separable;
  IntensityFunction f(static_cast<std::size_t>(shared->base().rows()),
                      [shared](double t) { return shared->at(t); }, shared->bound(), lip,
                      kind);
  f.separable_ = shared;
  if (kind == IntensityKind::constant)
    f.constant_ = std::make_shared<const Matrix>(shared->base());
  return f;
}

Matrix IntensityFunction::operator()(double t) const {
  Matrix m = eval_(t);
  const auto p = static_cast<Eigen::Index>(dim_);
  if (m.rows() != p || m.cols() != p)
    throw DimensionError("intensity evaluator returned a " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " matrix, expected " +
                         std::to_string(dim_) + "x" + std::to_string(dim_));
  return m;
}

IPHModel::IPHModel(ProbVector a, IntensityFunction s) : alpha(std::move(a)), sub(std::move(s)) {
  if (static_cast<std::size_t>(alpha.size()) != sub.dim())
    throw DimensionError("alpha has length " + std::to_string(alpha.size()) +
                         " but the subintensity is " + std::to_string(sub.dim()) + "x" +
                         std::to_string(sub.dim()));
}

Vector IPHModel::exit_vector(double t) const {
  return -(sub(t).rowwise().sum());
}

ValidationReport validate_intensity(const IntensityFunction &f,
                                    const std::vector<double> &sample_times) {
  if (sample_times.empty())
    throw InvalidInput("validate_intensity: no sample times");
  constexpr double tol = 1e-10;
  ValidationReport report;
  auto flag = [&](double t, const std::string &msg) { report.violations.push_back({t, msg}); };
  for (double t : sample_times) {
    const Matrix m = f(t);
    if (!m.allFinite()) {
      flag(t, "non-finite entry");
      continue;
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (m(i, i) > tol) {
        std::ostringstream os;
        os << "positive diagonal " << m(i, i) << " in row " << i;
        flag(t, os.str());
      }
      if (-m(i, i) > f.bound() * (1.0 + 1e-12) + tol) {
        std::ostringstream os;
        os << "|diagonal| " << -m(i, i) << " exceeds bound " << f.bound() << " in row " << i;
        flag(t, os.str());
      }
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (i != j && m(i, j) < -tol) {
          std::ostringstream os;
          os << "negative off-diagonal at (" << i << "," << j << ")";
          flag(t, os.str());
        }
      if (m.row(i).sum() > tol) {
        std::ostringstream os;
        os << "positive row sum in row " << i;
        flag(t, os.str());
      }
    }
  }
  return report;
}

IPHModel separable_model(const ProbVector &alpha, SeparableSubIntensity sub) {
  return IPHModel(alpha, IntensityFunction::from_separable(std::move(sub)));
}

IPHModel constant_model(const ProbVector &alpha, const Matrix &s) {
  return separable_model(alpha, SeparableSubIntensity(s, HazardFamily::constant));
}

IPHModel gompertz_model(const ProbVector &alpha, const Matrix &s, double beta, double cap) {
  return separable_model(alpha, SeparableSubIntensity(s, HazardFamily::gompertz, beta, cap));
}

IPHModel weibull_model(const ProbVector &alpha, const Matrix &s, double beta, double cap) {
  return separable_model(alpha, SeparableSubIntensity(s, HazardFamily::weibull, beta, cap));
}

IPHModel table_model(const ProbVector &alpha, const Matrix &s,
                     std::vector<std::pair<double, double>> table, double cap) {
  return separable_model(
      alpha, SeparableSubIntensity(s, HazardFamily::table, 1.0, cap, std::move(table)));
}

} // namespace mjpa
