#pragma once

#include "mjpa/model.hpp"
#include "mjpa/numkit.hpp"
#include "mjpa/qseq.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mjpa {

/// sum_l w_l Erlang(l, rate), l = 1..weights.size(); defect = 1 - sum w_l.
struct ErlangMixture {
  double rate = 0.0;
  std::vector<double> weights;
  double defect = 1.0;
};

/// Weights w_l = v_{l-1}(I - Q_l)e with v_0 = alpha, v_l = v_{l-1} Q_l, up to
/// L_max terms or until the surviving mass v_l e drops below mass_tol.
ErlangMixture iph_weights(const ProbVector &alpha, const QSequence &qs, std::size_t L_max,
                          double mass_tol = 1e-10);

/// Surviving row vectors v_0 .. v_L of the same recursion.
std::vector<RowVector> survival_vectors(const ProbVector &alpha, const QSequence &qs,
                                        std::size_t L);

double mixture_pdf(const ErlangMixture &m, double t);
double mixture_cdf(const ErlangMixture &m, double t);
std::vector<double> mixture_pdf(const ErlangMixture &m, const std::vector<double> &ts);
std::vector<double> mixture_cdf(const ErlangMixture &m, const std::vector<double> &ts);
double mixture_mean(const ErlangMixture &m);

enum class HazardEstimator { nelson_aalen, neg_log_ecdf };

std::string to_string(HazardEstimator e);
HazardEstimator hazard_estimator_from_string(const std::string &name);

struct HazardDensityFit {
  ErlangMixture mixture;
  std::size_t clamped = 0; // scalar Q values clamped into [0, 1]
  std::vector<double> q;   // Q_1 .. Q_L actually used
};

/// Coxian density estimate from a sample: scalar Q_l from a step estimator
/// of the cumulative hazard, then weights (1 - Q_l) prod_{m<l} Q_m. L_max
/// defaults to ceil(n * max(sample)).
HazardDensityFit hazard_density_estimate(const std::vector<double> &sample, double n,
                                         std::optional<std::size_t> L_max = std::nullopt,
                                         HazardEstimator estimator = HazardEstimator::nelson_aalen,
                                         double mass_tol = 1e-10);

/// Weights from conditional Q sequences averaged over `replications` sampled
/// grids of length L_max (streams 0 .. replications-1 of `seed`).
ErlangMixture conditional_weights_mc(const IPHModel &model, double n, std::size_t L_max,
                                     std::size_t replications, std::uint64_t seed,
                                     double mass_tol = 1e-10);

/// Density of the absorption time from a reference transition path:
/// alpha P(0, t) s(t) for each t.
std::vector<double> oracle_density(const IPHModel &model, const std::vector<double> &ts,
                                   double step_tol = 1e-11);

} // namespace mjpa
