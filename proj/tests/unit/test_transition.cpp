#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "../support/fixtures.hpp"
#include "mjpa/errors.hpp"
#include "mjpa/grid.hpp"
#include "mjpa/transition.hpp"

#include <cmath>

using namespace mjpa;
using fixtures::max_abs_diff;

namespace {

// cap 11 keeps lambda0 = 19.9 below every n used here
constexpr double kCap = 11.0;

IPHModel capped_gompertz() {
  return gompertz_model(ProbVector(fixtures::gompertz_alpha()), fixtures::gompertz_s(), 1.0, kCap);
}

IntensityFunction gompertz_general(double cap = kDefaultCap) {
  SeparableSubIntensity sub(fixtures::gompertz_s(), HazardFamily::gompertz, 1.0, cap);
  return IntensityFunction(2, [sub](double t) { return sub.at(t); }, sub.bound());
}

} // namespace

TEST_CASE("empty interval gives the identity") {
  const auto f = IntensityFunction::constant(fixtures::random_generator(3, 2));
  const auto r = transition_series(QSequence::tilde(f, 10.0), 0.8, 0.8);
  CHECK(max_abs_diff(r.P, Matrix::Identity(3, 3)) < 1e-12);
  CHECK(r.Kt == 0);
  CHECK(max_abs_diff(product_integral(f, 0.8, 0.8), Matrix::Identity(3, 3)) == 0.0);
}

TEST_CASE("constant intensity is reproduced by every variant") {
  const Matrix g = fixtures::random_generator(3, 11, 1.0);
  const auto f = IntensityFunction::constant(g);
  const Matrix expected = fixtures::reference_exp(g, 1.4);
  const double n = 5.0;
  const double tol = 1e-12;
  const auto grid = sample_grid(n, 200, 3);
  for (const auto &qs : {QSequence::conditional(f, grid), QSequence::hat(f, n),
                         QSequence::tilde(f, n)}) {
    const auto r = transition_series(qs, 0.3, 1.7, tol);
    CHECK(max_abs_diff(r.P, expected) < tol + 1e-12);
    CHECK(r.truncation_defect <= tol);
  }
}

TEST_CASE("short conditional grid is rejected") {
  const auto f = IntensityFunction::constant(fixtures::random_generator(2, 1));
  const auto qs = QSequence::conditional(f, sample_grid(20.0, 30, 1));
  CHECK_THROWS_AS(transition_series(qs, 0.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(transition_series(QSequence::hat(f, 5.0), 1.0, 0.5), InvalidInput);
  CHECK_THROWS_AS(transition_series(QSequence::hat(f, 5.0), 0.0, 0.5, 0.1), InvalidInput);
}

TEST_CASE("multi-time series matches single evaluations") {
  const auto m = capped_gompertz();
  const auto qs = QSequence::tilde(m.sub, 30.0);
  const std::vector<double> ts = {0.2, 0.5, 1.0, 1.3};
  const auto many = transition_series(qs, 0.2, ts);
  for (std::size_t i = 0; i < ts.size(); ++i)
    CHECK(max_abs_diff(many[i].P, transition_series(qs, 0.2, ts[i]).P) < 1e-15);
}

TEST_CASE("product integral: homogeneous and commuting cases") {
  const Matrix g = fixtures::random_generator(3, 5, 2.0, true);
  const auto general = IntensityFunction(3, [g](double) { return g; }, 10.0);
  CHECK(max_abs_diff(product_integral(general, 0.2, 1.1, 1e-10), fixtures::reference_exp(g, 0.9)) <
        1e-10);

  // S(t) = e^t S commutes with itself: P(s, t) = exp(S (e^t - e^s))
  const auto f = gompertz_general();
  const Matrix s = fixtures::gompertz_s();
  for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{0.5, 2.0}}) {
    const double tol = 1e-10;
    const Matrix expected = fixtures::reference_exp(s, std::exp(b) - std::exp(a));
    CHECK(max_abs_diff(product_integral(f, a, b, tol), expected) < 5 * tol);
  }
}

TEST_CASE("product integral semigroup") {
  const auto f = gompertz_general();
  const double tol = 1e-10;
  const Matrix p02 = product_integral(f, 0.0, 2.0, tol);
  const Matrix p01 = product_integral(f, 0.0, 1.0, tol);
  const Matrix p12 = product_integral(f, 1.0, 2.0, tol);
  CHECK(max_abs_diff(p01 * p12, p02) < 10 * tol);
  const auto path = product_integral_path(f, {0.0, 1.0, 2.0}, tol);
  CHECK(max_abs_diff(path[2], p02) < 10 * tol);
  CHECK(p02.minCoeff() >= -tol);
  CHECK(p02.rowwise().sum().maxCoeff() <= 1.0 + tol);
}

TEST_CASE("tilde deviation from the reference decreases in n") {
  const auto m = capped_gompertz();
  const Matrix oracle = product_integral(m.sub, 0.0, 1.0, 1e-11);
  double previous = 1.0;
  for (double n : {20.0, 40.0, 80.0}) {
    const auto r = transition_series(QSequence::tilde(m.sub, n), 0.0, 1.0, 1e-12);
    const double err = max_abs_diff(r.P, oracle);
    CHECK(err < previous);
    previous = err;
    CHECK(r.P.minCoeff() >= -1e-12);
    CHECK(r.P.rowwise().sum().maxCoeff() <= 1.0 + 1e-12);
  }
}

TEST_CASE("level-indexed kernel satisfies Chapman-Kolmogorov") {
  // P_{k -> k'}(s, t) = Poi_{n(t-s)}(k' - k) Q_{k+1} ... Q_{k'} on (level, state)
  const auto m = gompertz_model(ProbVector(fixtures::gompertz_alpha()), fixtures::gompertz_s(), 1.0, 27.0);
  const double n = 50.0;
  const auto qs = QSequence::conditional(m.sub, sample_grid(n, 200, 17));
  auto block = [&](std::size_t k, std::size_t k2, double dt) -> Matrix {
    Matrix prod = Matrix::Identity(2, 2);
    for (std::size_t l = k + 1; l <= k2; ++l)
      prod = prod * qs.at(l);
    return std::exp(log_poisson_pmf(n * dt, k2 - k)) * prod;
  };
  for (auto [k, k2] : {std::pair<std::size_t, std::size_t>{0, 50}, {10, 90}, {30, 40}}) {
    Matrix via = Matrix::Zero(2, 2);
    for (std::size_t mid = k; mid <= k2; ++mid)
      via += block(k, mid, 0.6) * block(mid, k2, 0.4);
    CHECK(max_abs_diff(via, block(k, k2, 1.0)) < 1e-15);
  }
}

TEST_CASE("error scan") {
  const auto c = IntensityFunction::constant(fixtures::gompertz_s());
  for (const auto &row : unconditional_error_scan(c, {10.0, 20.0}, 1.0, QVariant::tilde))
    CHECK(row.sup_error < 1e-9);

  const auto m = capped_gompertz();
  const auto rows = unconditional_error_scan(m.sub, {20.0, 40.0, 80.0}, 1.0, QVariant::tilde);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].sup_error <= rows[0].sup_error);
  CHECK(rows[2].sup_error <= rows[1].sup_error);
  CHECK(rows[0].sup_error / rows[2].sup_error >= 1.0);
  const auto hat = unconditional_error_scan(m.sub, {20.0, 80.0}, 1.0, QVariant::hat);
  CHECK(hat[1].sup_error <= hat[0].sup_error);
}
