#pragma once

#include "mjpa/iph.hpp"
#include "mjpa/model.hpp"
#include "mjpa/numkit.hpp"
#include "mjpa/qseq.hpp"
#include "mjpa/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace mjpa {

/// M-block truncation of the Erlang-chain subintensity: diagonal blocks -nI,
/// superdiagonal blocks nQ_1 .. nQ_{M-1}. The last block has no successor, so
/// its whole rate n leaves to absorption.
class TruncatedBlockGenerator {
public:
  TruncatedBlockGenerator(RowVector alpha, std::vector<Matrix> q, double n, double defect);

  std::size_t blocks() const { return q_.size(); }
  std::size_t block_size() const { return static_cast<std::size_t>(alpha_.size()); }
  std::size_t dim() const { return blocks() * block_size(); }
  double rate() const { return n_; }
  /// Surviving mass alpha Q_1 ... Q_M e that the truncation sends to absorption.
  double defect() const { return defect_; }
  const RowVector &alpha() const { return alpha_; }
  /// Q_l, 1-based, l = 1..M (Q_M only enters through the defect).
  const Matrix &q(std::size_t l) const { return q_.at(l - 1); }

  Matrix dense_generator() const;
  Vector dense_exit() const;
  RowVector dense_initial() const;

  /// y S for a row vector in block layout.
  RowVector left_multiply(const RowVector &y) const;
  /// y s, the exit rate seen from y.
  double exit_rate(const RowVector &y) const;

private:
  RowVector alpha_;
  std::vector<Matrix> q_;
  double n_;
  double defect_;
};

TruncatedBlockGenerator assemble_truncated(const ProbVector &alpha, const QSequence &qs,
                                           std::size_t M);

struct CLParams {
  double rho = 1.0; // premium rate
  double nu = 1.0;  // claim arrival intensity
  double u = 0.0;   // initial capital
};

struct RuinCurve {
  std::vector<double> u;
  std::vector<double> psi;
  /// alpha_- e = (nu / rho) E[claim]; ruin is certain when it reaches 1.
  double alpha_minus_mass = 0.0;
  double truncation_defect = 0.0;
  bool ruin_certain = false;
};

/// (nu / rho) alpha (-S)^{-1} by forward block substitution.
RowVector ladder_vector(const TruncatedBlockGenerator &gen, double rho, double nu);

/// psi(u) = alpha_- exp((S + s alpha_-) u) e on an increasing u grid, by
/// uniformized vector propagation that uses the block structure. `tol`
/// bounds the total Poisson truncation error over the grid.
RuinCurve ruin_curve(const TruncatedBlockGenerator &gen, double rho, double nu,
                     const std::vector<double> &u_grid, double tol = 1e-10);

double ruin_probability(const TruncatedBlockGenerator &gen, const CLParams &cl,
                        double tol = 1e-10);

/// Same quantity from the materialized matrices and a dense mat_exp.
double ruin_probability_dense(const TruncatedBlockGenerator &gen, const CLParams &cl,
                              double tol = 1e-10);

using ClaimSampler = std::function<double(CounterRng &)>;

struct RuinMC {
  std::vector<double> u;
  std::vector<double> psi;
  std::vector<double> std_error;
  /// Smallest value over paths of rho T_H - (claims up to H) at the last
  /// simulated claim; large values mean later ruin is negligible.
  double min_final_margin = 0.0;
  std::size_t replications = 0;
};

/// Monte Carlo ruin probabilities: each path runs `horizon_claims` claims
/// and records its largest deficit, so one simulation serves every u.
RuinMC cl_simulate(const CLParams &cl, const ClaimSampler &claims, std::size_t horizon_claims,
                   std::size_t replications, std::uint64_t seed,
                   const std::vector<double> &u_grid = {});

/// Exact sampler for the absorption time of an IPH model: closed-form time
/// change of a homogeneous phase-type draw for separable families, exact
/// uniformization otherwise.
ClaimSampler iph_sampler(const IPHModel &model);

/// Draws from an Erlang mixture (the defect is returned as +infinity).
ClaimSampler mixture_sampler(const ErlangMixture &mixture);

} // namespace mjpa
