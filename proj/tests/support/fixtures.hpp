#pragma once

#include "mjpa/numkit.hpp"
#include "mjpa/rng.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdint>

namespace fixtures {

// Random dense generator (rows sum to zero) or subgenerator (rows sum to
// -exit) with off-diagonal rates in [0, scale).
inline mjpa::Matrix random_generator(int p, std::uint64_t seed, double scale = 1.0,
                                     bool with_exit = false) {
  mjpa::CounterRng rng(seed, 7);
  mjpa::Matrix a = mjpa::Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    double total = 0.0;
    for (int j = 0; j < p; ++j)
      if (i != j) {
        a(i, j) = scale * rng.uniform();
        total += a(i, j);
      }
    a(i, i) = -total - (with_exit ? scale * rng.uniform() : 0.0);
  }
  return a;
}

// Reference exponential from Eigen's Pade-based implementation.
inline mjpa::Matrix reference_exp(const mjpa::Matrix &a, double t) {
  mjpa::Matrix scaled = a * t;
  return scaled.exp();
}

inline double max_abs_diff(const mjpa::Matrix &a, const mjpa::Matrix &b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline mjpa::Matrix gompertz_s() {
  mjpa::Matrix s(2, 2);
  s << -0.78, 0.57, 0.91, -1.81;
  return s;
}

inline mjpa::RowVector gompertz_alpha() {
  mjpa::RowVector a(2);
  a << 0.42, 0.58;
  return a;
}

} // namespace fixtures
