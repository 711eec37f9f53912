#pragma once

#include "mjpa/grid.hpp"
#include "mjpa/model.hpp"
#include "mjpa/numkit.hpp"

#include <atomic>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace mjpa {

enum class QVariant { conditional, hat, tilde, scalar_hazard, custom };

// strict: a Q_l entry outside [-1e-12, 1 + 1e-12] (or a row sum above
// 1 + 1e-12) throws NumericalError. permissive: the matrix is kept and the
// violation is counted; used to reproduce parameter sets with n < lambda0.
enum class QPolicy { strict, permissive };

std::string to_string(QVariant v);
QVariant q_variant_from_string(const std::string &name);

/// I + lam / n, entrywise as delta_ij + lam_ij / n.
Matrix one_step_matrix(const Matrix &lam, double n);

/// I + Lambda(chi_l) / n. Requires n >= lambda0 and 1 <= l <= grid size.
Matrix q_conditional(const IntensityFunction &f, const PoissonGrid &grid, std::size_t ell);

/// I + Lambda(l / n) / n.
Matrix q_hat(const IntensityFunction &f, double n, std::size_t ell);

/// I + E[Lambda(chi_l)] / n with chi_l ~ Erlang(l, n). Closed forms for the
/// separable families, composite Simpson quadrature otherwise.
Matrix q_tilde(const IntensityFunction &f, double n, std::size_t ell);

/// E[min(lambda(chi_l), cap)] for a separable model, closed form where the
/// family has one. Gompertz requires n > beta.
double tilde_factor(const SeparableSubIntensity &sub, double n, std::size_t ell);

/// E[g(chi_l)], chi_l ~ Erlang(l, n), by Simpson panel doubling on
/// [0, erlang quantile(1 - 1e-12)] until the change drops below rel_tol.
double erlang_expectation(const std::function<double(double)> &g, double n, std::size_t ell,
                          double rel_tol = 1e-10);
Matrix erlang_expectation(const std::function<Matrix(double)> &g, std::size_t dim, double n,
                          std::size_t ell, double rel_tol = 1e-10);

/// Nondecreasing step estimator of a cumulative hazard.
struct CumulativeHazardStep {
  std::vector<double> times; // increasing jump locations
  std::vector<double> jumps; // jump sizes, > 0
};

/// Jump 1/(N - i + 1) at the i-th order statistic.
CumulativeHazardStep nelson_aalen(std::vector<double> sample);

/// H = -log(1 - F_hat) with the largest observation dropped (its jump is infinite).
CumulativeHazardStep neg_log_ecdf_hazard(std::vector<double> sample);

struct ScalarQ {
  double value;
  bool clamped;
};

/// 1 - int (ns)^(l-1)/(l-1)! e^(-ns) h(s) ds, clamped to [0, 1].
ScalarQ q_scalar_from_hazard(const std::function<double(double)> &h, double n, std::size_t ell);

/// Stieltjes form: 1 - sum_i kernel(s_i) dH(s_i), clamped to [0, 1].
ScalarQ q_scalar_from_hazard(const CumulativeHazardStep &hazard, double n, std::size_t ell);

/// Lazily evaluated, memoized sequence Q_1, Q_2, ... (1-based).
///
/// Copies share the memo. Filling is serialized by a mutex and references
/// returned by at() stay valid for the lifetime of the sequence.
class QSequence {
public:
  using Generator = std::function<Matrix(std::size_t)>;

  static QSequence conditional(IntensityFunction f, PoissonGrid grid,
                               QPolicy policy = QPolicy::strict);
  static QSequence hat(IntensityFunction f, double n, QPolicy policy = QPolicy::strict);
  static QSequence tilde(IntensityFunction f, double n, QPolicy policy = QPolicy::strict);
  static QSequence scalar_hazard(CumulativeHazardStep hazard, double n);
  static QSequence scalar_hazard(std::function<double(double)> h, double n);
  static QSequence from_generator(QVariant variant, double n, std::size_t dim, Generator gen,
                                  std::optional<std::size_t> max_index = std::nullopt,
                                  QPolicy policy = QPolicy::strict);

  const Matrix &at(std::size_t ell) const;

  double rate() const { return n_; }
  std::size_t dim() const { return dim_; }
  QVariant variant() const { return variant_; }
  QPolicy policy() const { return policy_; }
  /// Largest admissible index (grid length for the conditional variant).
  std::optional<std::size_t> max_index() const { return max_index_; }

  /// Matrices that failed the validity check (permissive policy only).
  std::size_t violations() const { return memo_->violations.load(); }
  /// Scalar hazard values clamped into [0, 1].
  std::size_t clamped() const { return memo_->clamped.load(); }

private:
  struct Memo {
    std::mutex mutex;
    std::deque<Matrix> values;
    std::atomic<std::size_t> violations{0};
    std::atomic<std::size_t> clamped{0};
  };

  QSequence(QVariant variant, double n, std::size_t dim, Generator gen,
            std::optional<std::size_t> max_index, QPolicy policy);

  QVariant variant_;
  double n_;
  std::size_t dim_;
  Generator gen_;
  std::optional<std::size_t> max_index_;
  QPolicy policy_;
  std::shared_ptr<Memo> memo_;
};

/// Returns false (or throws under the strict policy) when `q` is not
/// substochastic within 1e-12.
bool check_substochastic(const Matrix &q, std::size_t ell, QPolicy policy);

} // namespace mjpa
