#include "mjpa/transition.hpp"

#include "mjpa/errors.hpp"
#include "mjpa/grid.hpp"

#include <algorithm>
#include <cmath>

namespace mjpa {

namespace {

std::vector<double> poisson_weights(double lambda, std::uint64_t k_max) {
  std::vector<double> w(k_max + 1);
  for (std::uint64_t k = 0; k <= k_max; ++k)
    w[k] = std::exp(log_poisson_pmf(lambda, k));
  return w;
}

double sum(const std::vector<double> &v) {
  double total = 0.0;
  for (double x : v)
    total += x;
  return total;
}

double row_sum_norm(const Matrix &a) { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

} // namespace

std::vector<TransitionResult> transition_series(const QSequence &qs, double s,
                                                const std::vector<double> &ts,
                                                double tail_tol) {
  if (!(tail_tol > 0.0 && tail_tol <= 1e-3))
    throw InvalidInput("transition_series: tail_tol must lie in (0, 1e-3]");
  if (!(s >= 0.0) || !std::isfinite(s))
    throw InvalidInput("transition_series: s must be finite and >= 0");
  const double n = qs.rate();
  const auto p = static_cast<Eigen::Index>(qs.dim());

  const std::uint64_t ks = poisson_truncation(n * s, tail_tol / 2.0);
  const std::vector<double> a = poisson_weights(n * s, ks);
  const double mass_s = sum(a);

  std::vector<TransitionResult> out(ts.size());
  std::vector<std::vector<double>> b(ts.size());
  std::uint64_t kt_max = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] >= s) || !std::isfinite(ts[i]))
      throw InvalidInput("transition_series: need s <= t < inf");
    const double lam = n * (ts[i] - s);
    out[i].Ks = ks;
    out[i].Kt = poisson_truncation(lam, tail_tol / 2.0);
    b[i] = poisson_weights(lam, out[i].Kt);
    out[i].truncation_defect = 1.0 - mass_s * sum(b[i]);
    out[i].P = Matrix::Zero(p, p);
    kt_max = std::max(kt_max, out[i].Kt);
  }
  if (auto m = qs.max_index(); m && ks + kt_max > *m)
    throw PreconditionError("transition_series: the conditional grid has " + std::to_string(*m) +
                            " points but the truncated series needs " +
                            std::to_string(ks + kt_max));

  Matrix running(p, p);
  for (std::uint64_t k = 0; k <= ks; ++k) {
    if (a[k] == 0.0)
      continue;
    running.setIdentity();
    for (std::uint64_t l = 0; l <= kt_max; ++l) {
      if (l > 0)
        running = running * qs.at(k + l);
      for (std::size_t i = 0; i < ts.size(); ++i)
        if (l <= out[i].Kt)
          out[i].P.noalias() += (a[k] * b[i][l]) * running;
    }
  }
  return out;
}

TransitionResult transition_series(const QSequence &qs, double s, double t, double tail_tol) {
  return transition_series(qs, s, std::vector<double>{t}, tail_tol).front();
}

namespace {

Matrix midpoint_product(const IntensityFunction &f, double s, double t, std::size_t panels) {
  const auto p = static_cast<Eigen::Index>(f.dim());
  const double h = (t - s) / static_cast<double>(panels);
  Matrix prod = Matrix::Identity(p, p);
  for (std::size_t k = 0; k < panels; ++k) {
    const double mid = s + (static_cast<double>(k) + 0.5) * h;
    prod = prod * mat_exp(f(mid), h, 1e-15);
  }
  return prod;
}

} // namespace

Matrix product_integral(const IntensityFunction &f, double s, double t, double step_tol) {
  if (!(s >= 0.0) || !(t >= s) || !std::isfinite(t))
    throw InvalidInput("product_integral: need 0 <= s <= t < inf");
  if (!(step_tol > 0.0))
    throw InvalidInput("product_integral: step_tol must be positive");
  const auto p = static_cast<Eigen::Index>(f.dim());
  if (t == s)
    return Matrix::Identity(p, p);
  if (const Matrix *c = f.constant_value())
    return mat_exp(*c, t - s, std::min(1e-3, step_tol));

  // The midpoint product is symmetric, so its error expands in even powers
  // of the panel width; one Richardson step gives fourth order.
  std::size_t panels = 4;
  Matrix coarse = midpoint_product(f, s, t, panels);
  Matrix current = coarse;
  for (int round = 0; round < 22; ++round) {
    panels *= 2;
    Matrix fine = midpoint_product(f, s, t, panels);
    Matrix next = (4.0 * fine - coarse) / 3.0;
    const double change = (next - current).cwiseAbs().maxCoeff();
    current = std::move(next);
    coarse = std::move(fine);
    if (round > 0 && change < step_tol)
      return current;
  }
  throw NumericalError("product_integral did not reach step_tol");
}

std::vector<Matrix> product_integral_path(const IntensityFunction &f,
                                          const std::vector<double> &times, double step_tol) {
  if (times.empty())
    throw InvalidInput("product_integral_path: no times");
  std::vector<Matrix> out;
  out.reserve(times.size());
  const auto p = static_cast<Eigen::Index>(f.dim());
  out.push_back(Matrix::Identity(p, p));
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] < times[i - 1])
      throw InvalidInput("product_integral_path: times must be nondecreasing");
    out.push_back(out.back() * product_integral(f, times[i - 1], times[i], step_tol));
  }
  return out;
}

std::vector<ErrorScanRow> unconditional_error_scan(const IntensityFunction &f,
                                                   const std::vector<double> &n_values, double T,
                                                   QVariant variant, double tail_tol,
                                                   std::size_t points, std::uint64_t seed,
                                                   QPolicy policy) {
  if (!(T > 0.0) || !std::isfinite(T))
    throw InvalidInput("error scan: T must be positive");
  if (points == 0)
    throw InvalidInput("error scan: need at least one grid step");
  if (!f.lipschitz() && !f.separable() && !f.constant_value())
    throw PreconditionError("error scan needs a Lipschitz constant or a closed-form family");

  std::vector<double> grid(points + 1);
  for (std::size_t i = 0; i <= points; ++i)
    grid[i] = T * static_cast<double>(i) / static_cast<double>(points);

  // oracle P(s_i, t_j) for every grid pair from chained panels
  std::vector<std::vector<Matrix>> oracle(points + 1);
  for (std::size_t i = 0; i <= points; ++i) {
    std::vector<double> tail(grid.begin() + static_cast<std::ptrdiff_t>(i), grid.end());
    oracle[i] = product_integral_path(f, tail, 1e-11);
  }

  std::vector<ErrorScanRow> rows;
  for (std::size_t idx = 0; idx < n_values.size(); ++idx) {
    const double n = n_values[idx];
    QSequence qs = [&] {
      switch (variant) {
      case QVariant::hat:
        return QSequence::hat(f, n, policy);
      case QVariant::tilde:
        return QSequence::tilde(f, n, policy);
      case QVariant::conditional: {
        const std::uint64_t need = poisson_truncation(n * T, tail_tol / 2.0) * 2 + 16;
        return QSequence::conditional(f, sample_grid(n, need, seed, idx), policy);
      }
      default:
        throw InvalidInput("error scan supports the conditional, hat and tilde variants");
      }
    }();
    double worst = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
      std::vector<double> ends(grid.begin() + static_cast<std::ptrdiff_t>(i) + 1, grid.end());
      const auto approx = transition_series(qs, grid[i], ends, tail_tol);
      for (std::size_t j = 0; j < ends.size(); ++j)
        worst = std::max(worst, row_sum_norm(approx[j].P - oracle[i][j + 1]));
    }
    rows.push_back({n, variant, worst, T, tail_tol});
  }
  return rows;
}

} // namespace mjpa
