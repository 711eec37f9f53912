#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "../support/fixtures.hpp"
#include "mjpa/errors.hpp"
#include "mjpa/numkit.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>

using namespace mjpa;
using fixtures::max_abs_diff;

namespace {
using big = boost::multiprecision::cpp_bin_float_50;
}

TEST_CASE("mat_exp trivial cases") {
  CHECK(max_abs_diff(mat_exp(Matrix::Zero(2, 2), 5.0), Matrix::Identity(2, 2)) == 0.0);

  Matrix nil(2, 2);
  nil << 0, 1, 0, 0;
  Matrix expected(2, 2);
  expected << 1, 1, 0, 1;
  CHECK(max_abs_diff(mat_exp(nil, 1.0), expected) < 1e-14);

  Matrix d = Matrix::Constant(1, 1, -1.0);
  CHECK(mat_exp(d, 1.0)(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("mat_exp agrees with a Pade reference") {
  for (int p : {2, 3, 6}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Matrix g = fixtures::random_generator(p, seed, 2.0, seed % 2 == 1);
      for (double t : {0.01, 0.7, 3.0, 25.0})
        CHECK(max_abs_diff(mat_exp(g, t), fixtures::reference_exp(g, t)) < 1e-11);
    }
  }
  // non-generator input goes through the Taylor branch
  Matrix a(2, 2);
  a << 0.3, -1.2, 2.0, 0.5;
  CHECK(max_abs_diff(mat_exp(a, 2.0), fixtures::reference_exp(a, 2.0)) < 1e-11);
}

TEST_CASE("mat_exp semigroup and substochastic rows") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int p = 2 + static_cast<int>(seed % 5);
    const Matrix g = fixtures::random_generator(p, seed, 3.0, true);
    const double tol = 1e-12;
    const Matrix lhs = mat_exp(g, 1.3, tol);
    const Matrix rhs = mat_exp(g, 0.4, tol) * mat_exp(g, 0.9, tol);
    CHECK(max_abs_diff(lhs, rhs) < 10 * tol);
    CHECK(lhs.minCoeff() >= -tol);
    CHECK(lhs.rowwise().sum().maxCoeff() <= 1.0 + tol);
  }
}

TEST_CASE("mat_exp validates input") {
  CHECK_THROWS_AS(mat_exp(Matrix::Zero(2, 3), 1.0), DimensionError);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(mat_exp(bad, 1.0), InvalidInput);
  CHECK_THROWS_AS(mat_exp(Matrix::Zero(2, 2), 1.0, 0.1), InvalidInput);
  CHECK_THROWS_AS(mat_exp(Matrix::Zero(2, 2), -1.0), InvalidInput);
}

TEST_CASE("log_poisson_pmf") {
  CHECK(log_poisson_pmf(1.0, 0) == doctest::Approx(-1.0));
  CHECK(log_poisson_pmf(0.0, 0) == 0.0);
  CHECK(std::isinf(log_poisson_pmf(0.0, 3)));
  CHECK_THROWS_AS(log_poisson_pmf(-1.0, 0), InvalidInput);

  // 100^100 e^-100 / 100! in 50-digit arithmetic
  big lam = 100;
  big fact = 1;
  for (int k = 2; k <= 100; ++k)
    fact *= k;
  const big exact = boost::multiprecision::pow(lam, 100) * boost::multiprecision::exp(-lam) / fact;
  CHECK(log_poisson_pmf(100.0, 100) ==
        doctest::Approx(static_cast<double>(boost::multiprecision::log(exact))).epsilon(1e-14));

  for (double lambda : {0.5, 10.0, 1000.0, 1e4}) {
    double total = 0.0;
    const auto k_max = static_cast<std::uint64_t>(lambda + 40 * std::sqrt(lambda) + 50);
    for (std::uint64_t m = 0; m <= k_max; ++m)
      total += std::exp(log_poisson_pmf(lambda, m));
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("erlang_logpdf") {
  CHECK(erlang_logpdf(1, 2.0, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(erlang_logpdf(2, 1.0, 1.0) == doctest::Approx(-1.0));
  CHECK(std::isinf(erlang_logpdf(3, 1.0, 0.0)));
  CHECK_THROWS_AS(erlang_logpdf(1, 1.0, -0.1), InvalidInput);

  // 100^50 0.5^49 e^-50 / 49!
  big fact = 1;
  for (int k = 2; k <= 49; ++k)
    fact *= k;
  const big v = boost::multiprecision::pow(big(100), 50) * boost::multiprecision::pow(big(0.5), 49) *
                boost::multiprecision::exp(big(-50)) / fact;
  CHECK(erlang_logpdf(50, 100.0, 0.5) ==
        doctest::Approx(static_cast<double>(boost::multiprecision::log(v))).epsilon(1e-13));

  // integrates to one (composite Simpson)
  for (std::uint64_t ell : {1u, 5u, 50u}) {
    const double rate = 3.0;
    const double upper = (static_cast<double>(ell) + 40.0 * std::sqrt(static_cast<double>(ell)) + 40.0) / rate;
    const int panels = 20000;
    const double h = upper / panels;
    double s = 0.0;
    for (int k = 0; k <= panels; ++k) {
      const double w = (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      s += w * std::exp(erlang_logpdf(ell, rate, k * h));
    }
    CHECK(std::abs(s * h / 3.0 - 1.0) < 1e-8);
  }
}

TEST_CASE("poisson_truncation") {
  CHECK(poisson_truncation(0.0, 1e-12) == 0);
  CHECK(poisson_truncation(1.0, 0.5) == 1);
  CHECK_THROWS_AS(poisson_truncation(1.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(poisson_truncation(1.0, 0.0), InvalidInput);

  for (double lambda : {0.3, 5.0, 100.0, 5000.0}) {
    for (double eps : {1e-4, 1e-10}) {
      const auto k = poisson_truncation(lambda, eps);
      double mass = 0.0;
      for (std::uint64_t m = 0; m <= k; ++m)
        mass += std::exp(log_poisson_pmf(lambda, m));
      CHECK(mass >= 1.0 - eps - 1e-13);
      if (k > 0) {
        const double below = mass - std::exp(log_poisson_pmf(lambda, k));
        CHECK(below < 1.0 - eps + 1e-13);
      }
    }
  }
}

TEST_CASE("erlang_cdf matches summed Poisson tail") {
  for (std::uint64_t ell : {1u, 3u, 20u}) {
    const double rate = 4.0, t = 2.5;
    double tail = 0.0;
    for (std::uint64_t m = 0; m < ell; ++m)
      tail += std::exp(log_poisson_pmf(rate * t, m));
    CHECK(erlang_cdf(ell, rate, t) == doctest::Approx(1.0 - tail).epsilon(1e-13));
  }
  CHECK(erlang_cdf(2, 1.0, 0.0) == 0.0);
}

TEST_CASE("ProbVector validation") {
  RowVector ok(3);
  ok << 0.2, 0.3, 0.5;
  CHECK(ProbVector(ok).mass() == doctest::Approx(1.0));
  RowVector defective(2);
  defective << 0.2, 0.3;
  CHECK(ProbVector(defective).mass() == doctest::Approx(0.5));
  RowVector neg(2);
  neg << -0.1, 0.5;
  CHECK_THROWS_AS(ProbVector{neg}, InvalidInput);
  RowVector over(2);
  over << 0.6, 0.5;
  CHECK_THROWS_AS(ProbVector{over}, InvalidInput);
}
