#pragma once

#include "mjpa/numkit.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mjpa {

enum class HazardFamily { constant, gompertz, weibull, table, custom };
enum class IntensityKind { general, separable, constant };

std::string to_string(HazardFamily f);
HazardFamily hazard_family_from_string(const std::string &name);

inline constexpr double kDefaultCap = 1e6;

/// S(t) = min(lambda(t), cap) * S for a fixed subintensity S.
///
/// `table` pairs (t_k, v_k) define a left-continuous step function:
/// lambda(t) = v_0 for t <= t_1 and v_k for t_k < t <= t_{k+1}.
class SeparableSubIntensity {
public:
  SeparableSubIntensity(Matrix base, HazardFamily family, double beta = 1.0,
                        double cap = kDefaultCap,
                        std::vector<std::pair<double, double>> table = {},
                        std::function<double(double)> custom = {});

  const Matrix &base() const { return base_; }
  HazardFamily family() const { return family_; }
  double beta() const { return beta_; }
  double cap() const { return cap_; }
  const std::vector<std::pair<double, double>> &table() const { return table_; }

  double raw_rate(double t) const;
  double rate(double t) const { return std::min(raw_rate(t), cap_); }

  /// sup_t lambda(t) when it is known to be finite.
  std::optional<double> rate_sup() const;

  /// Uniform bound lambda0 on |S_ii(t)|.
  double bound() const;

  Matrix at(double t) const { return rate(t) * base_; }

private:
  Matrix base_;
  HazardFamily family_;
  double beta_;
  double cap_;
  std::vector<std::pair<double, double>> table_;
  std::function<double(double)> custom_;
};

/// t -> Lambda(t), p x p, with a declared uniform bound lambda0.
class IntensityFunction {
public:
  using Evaluator = std::function<Matrix(double)>;

  IntensityFunction(std::size_t dim, Evaluator eval, double bound,
                    std::optional<double> lipschitz = std::nullopt,
                    IntensityKind kind = IntensityKind::general);

  static IntensityFunction constant(const Matrix &generator);
  static IntensityFunction from_separable(SeparableSubIntensity sub);

  /// Throws DimensionError if the evaluator returns the wrong shape.
  Matrix operator()(double t) const;

  std::size_t dim() const { return dim_; }
  double bound() const { return bound_; }
  std::optional<double> lipschitz() const { return lipschitz_; }
  IntensityKind kind() const { return kind_; }

  /// Present when built from a separable description.
  const SeparableSubIntensity *separable() const { return separable_.get(); }

  /// Present for constant intensities.
  const Matrix *constant_value() const { return constant_.get(); }

private:
  std::size_t dim_;
  Evaluator eval_;
  double bound_;
  std::optional<double> lipschitz_;
  IntensityKind kind_;
  std::shared_ptr<const SeparableSubIntensity> separable_;
  std::shared_ptr<const Matrix> constant_;
};

struct IPHModel {
  ProbVector alpha;
  IntensityFunction sub;

  IPHModel(ProbVector alpha, IntensityFunction sub);

  std::size_t dim() const { return sub.dim(); }
  Vector exit_vector(double t) const;
};

struct Violation {
  double t;
  std::string what;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool passed() const { return violations.empty(); }
};

/// Spot-checks sign structure, row sums and the bound lambda0 on the given
/// times (tolerance 1e-10).
ValidationReport validate_intensity(const IntensityFunction &f,
                                    const std::vector<double> &sample_times);

/// Throws InvalidInput unless `s` is a square subintensity matrix.
void require_subintensity(const Matrix &s, const std::string &what = "S");

IPHModel constant_model(const ProbVector &alpha, const Matrix &s);
/// lambda(t) = exp(beta t)
IPHModel gompertz_model(const ProbVector &alpha, const Matrix &s, double beta,
                        double cap = kDefaultCap);
/// lambda(t) = beta t^(beta-1)
IPHModel weibull_model(const ProbVector &alpha, const Matrix &s, double beta,
                       double cap = kDefaultCap);
IPHModel table_model(const ProbVector &alpha, const Matrix &s,
                     std::vector<std::pair<double, double>> table,
                     double cap = kDefaultCap);
IPHModel separable_model(const ProbVector &alpha, SeparableSubIntensity sub);

} // namespace mjpa
