#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "../support/fixtures.hpp"
#include "mjpa/errors.hpp"
#include "mjpa/qseq.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <thread>

using namespace mjpa;
using fixtures::max_abs_diff;

namespace {

// Erlang(l, n) expectation of g over [a, b] by adaptive Gauss-Kronrod.
double erlang_integral(const std::function<double(double)> &g, double n, std::size_t ell,
                       double a, double b) {
  auto f = [&](double s) {
    const double w = std::exp(erlang_logpdf(ell, n, s));
    return w == 0.0 ? 0.0 : g(s) * w;
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-13);
}

IntensityFunction as_general(const SeparableSubIntensity &sub) {
  return IntensityFunction(static_cast<std::size_t>(sub.base().rows()),
                           [sub](double t) { return sub.at(t); }, sub.bound());
}

} // namespace

TEST_CASE("zero intensity gives identity in every variant") {
  const auto f = IntensityFunction::constant(Matrix::Zero(3, 3));
  const auto grid = sample_grid(5.0, 20, 1);
  for (std::size_t l = 1; l <= 20; ++l) {
    CHECK(q_conditional(f, grid, l) == Matrix::Identity(3, 3));
    CHECK(q_hat(f, 5.0, l) == Matrix::Identity(3, 3));
    CHECK(q_tilde(f, 5.0, l) == Matrix::Identity(3, 3));
  }
}

TEST_CASE("constant intensity: variants coincide exactly") {
  const Matrix g = fixtures::random_generator(3, 4, 1.5, true);
  const auto f = IntensityFunction::constant(g);
  const double n = 10.0;
  const auto grid = sample_grid(n, 50, 2);
  const Matrix expected = Matrix::Identity(3, 3) + g / n;
  for (std::size_t l = 1; l <= 50; ++l) {
    const Matrix c = q_conditional(f, grid, l);
    CHECK(max_abs_diff(c, expected) < 1e-15);
    CHECK(c == q_hat(f, n, l));
    CHECK(c == q_tilde(f, n, l));
  }
}

TEST_CASE("conditional Q for capped exponential hazard") {
  const double cap = 30.0;
  SeparableSubIntensity sub(Matrix::Constant(1, 1, -1.0), HazardFamily::gompertz, 1.0, cap);
  const auto f = IntensityFunction::from_separable(sub);
  const double n = 40.0;
  const auto grid = sample_grid(n, 200, 6);
  for (std::size_t l = 1; l <= 200; ++l) {
    const double expected = 1.0 - std::min(std::exp(grid.at(l)), cap) / n;
    CHECK(q_conditional(f, grid, l)(0, 0) == doctest::Approx(expected).epsilon(1e-15));
  }
  CHECK_THROWS_AS(q_conditional(f, grid, 201), PreconditionError);
  const auto slow = sample_grid(20.0, 10, 6);
  CHECK_THROWS_AS(q_conditional(f, slow, 1), PreconditionError);
  CHECK_THROWS_AS(QSequence::conditional(f, slow), PreconditionError);
}

TEST_CASE("hat variant substitutes l / n") {
  SeparableSubIntensity sub(Matrix::Constant(1, 1, -1.0), HazardFamily::gompertz, 1.0,
                            std::numeric_limits<double>::infinity());
  const auto f = IntensityFunction::from_separable(sub);
  CHECK(q_hat(f, 20.0, 20)(0, 0) == doctest::Approx(1.0 - std::exp(1.0) / 20.0).epsilon(1e-15));
}

TEST_CASE("Gompertz tilde closed form") {
  const Matrix s = fixtures::gompertz_s();
  SeparableSubIntensity sub(s, HazardFamily::gompertz, 1.0,
                            std::numeric_limits<double>::infinity());
  CHECK(tilde_factor(sub, 20.0, 1) == doctest::Approx(20.0 / 19.0).epsilon(1e-15));
  const auto f = IntensityFunction::from_separable(sub);
  CHECK(max_abs_diff(q_tilde(f, 20.0, 1), Matrix::Identity(2, 2) + (20.0 / 19.0) * s / 20.0) <
        1e-15);
  CHECK(tilde_factor(sub, 20.0, 7) == doctest::Approx(std::pow(20.0 / 19.0, 7)).epsilon(1e-14));
  CHECK_THROWS_AS(tilde_factor(sub, 1.0, 1), DomainError);
  CHECK_THROWS_AS(QSequence::tilde(f, 0.5), DomainError);
}

TEST_CASE("quadrature matches the Gompertz and Weibull closed forms") {
  Matrix w_base(2, 2);
  w_base << -3, 0.1, 0.01, -0.1;
  const std::vector<SeparableSubIntensity> subs = {
      SeparableSubIntensity(fixtures::gompertz_s(), HazardFamily::gompertz, 1.0),
      SeparableSubIntensity(w_base, HazardFamily::weibull, 3.0),
      SeparableSubIntensity(w_base, HazardFamily::weibull, 1.7),
  };
  for (const auto &sub : subs) {
    const auto closed = IntensityFunction::from_separable(sub);
    const auto general = as_general(sub);
    for (double n : {20.0, 100.0}) {
      for (std::size_t l : {1u, 2u, 10u, 50u, 120u, 200u}) {
        const Matrix a = q_tilde(closed, n, l);
        const Matrix b = q_tilde(general, n, l);
        CHECK(max_abs_diff(a, b) < 1e-8 * std::max(1.0, a.cwiseAbs().maxCoeff()));
      }
    }
  }
}

TEST_CASE("capped closed forms against adaptive quadrature") {
  const Matrix s = Matrix::Constant(1, 1, -1.0);
  struct Case {
    HazardFamily family;
    double beta;
    double cap;
    double kink; // where raw rate reaches the cap
  };
  const std::vector<Case> cases = {
      {HazardFamily::gompertz, 1.0, 5.0, std::log(5.0)},
      {HazardFamily::gompertz, 2.5, 40.0, std::log(40.0) / 2.5},
      {HazardFamily::weibull, 3.0, 2.0, std::sqrt(2.0 / 3.0)},
      {HazardFamily::weibull, 0.5, 4.0, std::pow(4.0 / 0.5, 1.0 / -0.5)},
  };
  for (const auto &c : cases) {
    SeparableSubIntensity sub(s, c.family, c.beta, c.cap);
    for (double n : {10.0, 60.0}) {
      for (std::size_t l : {1u, 3u, 25u, 80u}) {
        auto g = [&](double t) { return sub.rate(t); };
        const double upper = gamma_p_inv(static_cast<double>(l), 1.0 - 1e-16) / n + 1.0;
        double expected = erlang_integral(g, n, l, 0.0, c.kink);
        if (c.kink < upper)
          expected += erlang_integral(g, n, l, c.kink, upper);
        CHECK(tilde_factor(sub, n, l) == doctest::Approx(expected).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("table factor against piecewise quadrature") {
  const Matrix s = Matrix::Constant(1, 1, -1.0);
  const std::vector<std::pair<double, double>> table = {{0.1, 1.0}, {0.3, 4.0}, {0.7, 0.5}};
  SeparableSubIntensity sub(s, HazardFamily::table, 1.0, 3.0, table);
  const std::vector<double> cuts = {0.0, 0.3, 0.7, 60.0};
  for (double n : {5.0, 30.0}) {
    for (std::size_t l : {1u, 4u, 12u}) {
      double expected = 0.0;
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
        expected += erlang_integral([&](double t) { return sub.rate(t); }, n, l,
                                    cuts[k] + 1e-15, cuts[k + 1]);
      CHECK(tilde_factor(sub, n, l) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
  SeparableSubIntensity flat(s, HazardFamily::table, 1.0, kDefaultCap, {{1.0, 2.5}});
  CHECK(tilde_factor(flat, 7.0, 9) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("Weibull beta = 1 tilde sequence is bitwise the constant sequence") {
  const Matrix s = fixtures::gompertz_s();
  const auto w = weibull_model(ProbVector(fixtures::gompertz_alpha()), s, 1.0);
  const auto c = constant_model(ProbVector(fixtures::gompertz_alpha()), s);
  const auto qw = QSequence::tilde(w.sub, 10.0);
  const auto qc = QSequence::tilde(c.sub, 10.0);
  for (std::size_t l = 1; l <= 500; ++l)
    REQUIRE((qw.at(l).array() == qc.at(l).array()).all());
}

TEST_CASE("validity policy") {
  const auto f = IntensityFunction::constant(Matrix::Constant(1, 1, -50.0));
  CHECK_THROWS_AS(QSequence::hat(f, 45.0).at(1), NumericalError);
  const auto permissive = QSequence::hat(f, 45.0, QPolicy::permissive);
  CHECK(permissive.at(3)(0, 0) == doctest::Approx(1.0 - 50.0 / 45.0));
  CHECK(permissive.violations() == 3);
  CHECK(check_substochastic(Matrix::Identity(2, 2), 1, QPolicy::strict));
}

TEST_CASE("memo is shared and thread safe") {
  const auto m = gompertz_model(ProbVector(fixtures::gompertz_alpha()), fixtures::gompertz_s(), 1.0);
  const auto q = QSequence::tilde(m.sub, 100.0);
  const auto copy = q;
  std::vector<std::thread> workers;
  std::vector<double> sums(4, 0.0);
  for (int w = 0; w < 4; ++w)
    workers.emplace_back([&, w] {
      for (std::size_t l = 1; l <= 300; ++l)
        sums[static_cast<std::size_t>(w)] += (w % 2 ? copy : q).at(l).sum();
    });
  for (auto &t : workers)
    t.join();
  for (double s : sums)
    CHECK(s == sums[0]);
  const Matrix *first = &q.at(1);
  q.at(350);
  CHECK(first == &copy.at(1));
  CHECK(max_abs_diff(q.at(17), q_tilde(m.sub, 100.0, 17)) == 0.0);
}

TEST_CASE("scalar Q from a hazard function") {
  for (std::size_t l : {1u, 5u, 40u}) {
    const auto r = q_scalar_from_hazard([](double) { return 0.7; }, 10.0, l);
    CHECK(r.value == doctest::Approx(1.0 - 0.07).epsilon(1e-12));
    CHECK_FALSE(r.clamped);
  }
  const auto clamped = q_scalar_from_hazard([](double) { return 20.0; }, 10.0, 3);
  CHECK(clamped.value == 0.0);
  CHECK(clamped.clamped);
}

TEST_CASE("single-atom Stieltjes sum") {
  const double c = 0.4, s0 = 0.3, n = 20.0;
  const CumulativeHazardStep h{{s0}, {c}};
  for (std::size_t l : {1u, 2u, 6u, 15u}) {
    const double kernel = std::pow(n * s0, static_cast<double>(l) - 1.0) * std::exp(-n * s0) /
                          std::tgamma(static_cast<double>(l));
    CHECK(q_scalar_from_hazard(h, n, l).value == doctest::Approx(1.0 - c * kernel).epsilon(1e-13));
  }
  CHECK_THROWS_AS(q_scalar_from_hazard(CumulativeHazardStep{}, n, 1), InvalidInput);
}

TEST_CASE("Nelson-Aalen estimator") {
  const auto h = nelson_aalen({3.0, 1.0, 2.0});
  REQUIRE(h.times == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(h.jumps[0] == doctest::Approx(1.0 / 3.0));
  CHECK(h.jumps[1] == doctest::Approx(1.0 / 2.0));
  CHECK(h.jumps[2] == doctest::Approx(1.0));
  CHECK_THROWS_AS(nelson_aalen({}), InvalidInput);
  CHECK_THROWS_AS(nelson_aalen({1.0, -2.0}), InvalidInput);
}

TEST_CASE("negative log ECDF estimator drops the maximum") {
  const auto h = neg_log_ecdf_hazard({1.0, 2.0, 3.0, 4.0});
  REQUIRE(h.times == std::vector<double>{1.0, 2.0, 3.0});
  double total = 0.0;
  for (double j : h.jumps)
    total += j;
  CHECK(total == doctest::Approx(std::log(4.0)));
  CHECK_THROWS_AS(neg_log_ecdf_hazard({2.0, 2.0, 2.0}), InvalidInput);
}

TEST_CASE("Nelson-Aalen Q tracks the exponential truth") {
  CounterRng rng(2024);
  std::vector<double> sample(5000);
  for (auto &x : sample)
    x = rng.exponential(1.0);
  const double n = 100.0;
  const auto q = QSequence::scalar_hazard(nelson_aalen(sample), n);
  // Stieltjes sum has standard deviation about sqrt(N / (2 n)) / N for small l
  const double tol = 4.0 * std::sqrt(5000.0 / (2.0 * n)) / 5000.0 + 1.0 / (n * n);
  for (std::size_t l = 1; l <= 5; ++l)
    CHECK(std::abs(q.at(l)(0, 0) - (1.0 - 1.0 / n)) < tol);
}

TEST_CASE("variant names") {
  CHECK(q_variant_from_string("tilde") == QVariant::tilde);
  CHECK(to_string(QVariant::conditional) == "conditional");
  CHECK_THROWS_AS(q_variant_from_string("bogus"), InvalidInput);
}
