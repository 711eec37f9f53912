#include "mjpa/ruin.hpp"

#include "mjpa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mjpa {

TruncatedBlockGenerator::TruncatedBlockGenerator(RowVector alpha, std::vector<Matrix> q,
                                                 double n, double defect)
    : alpha_(std::move(alpha)), q_(std::move(q)), n_(n), defect_(defect) {
  if (q_.empty())
    throw InvalidInput("truncated generator needs at least one block");
  if (!(n_ > 0.0) || !std::isfinite(n_))
    throw InvalidInput("truncated generator: rate must be positive");
  for (const auto &m : q_)
    if (m.rows() != alpha_.size() || m.cols() != alpha_.size())
      throw DimensionError("truncated generator: block size mismatch");
}

Matrix TruncatedBlockGenerator::dense_generator() const {
  const auto p = static_cast<Eigen::Index>(block_size());
  const auto M = static_cast<Eigen::Index>(blocks());
  Matrix s = Matrix::Zero(M * p, M * p);
  for (Eigen::Index b = 0; b < M; ++b) {
    s.block(b * p, b * p, p, p) = -n_ * Matrix::Identity(p, p);
    if (b + 1 < M)
      s.block(b * p, (b + 1) * p, p, p) = n_ * q_[static_cast<std::size_t>(b)];
  }
  return s;
}

Vector TruncatedBlockGenerator::dense_exit() const {
  return -(dense_generator().rowwise().sum());
}

RowVector TruncatedBlockGenerator::dense_initial() const {
  RowVector a = RowVector::Zero(static_cast<Eigen::Index>(dim()));
  a.head(alpha_.size()) = alpha_;
  return a;
}

RowVector TruncatedBlockGenerator::left_multiply(const RowVector &y) const {
  const auto p = static_cast<Eigen::Index>(block_size());
  RowVector out = -n_ * y;
  for (std::size_t b = 1; b < blocks(); ++b) {
    const auto at = static_cast<Eigen::Index>(b) * p;
    out.segment(at, p).noalias() += n_ * (y.segment(at - p, p) * q_[b - 1]);
  }
  return out;
}

double TruncatedBlockGenerator::exit_rate(const RowVector &y) const {
  const auto p = static_cast<Eigen::Index>(block_size());
  double total = 0.0;
  for (std::size_t b = 0; b + 1 < blocks(); ++b) {
    const auto at = static_cast<Eigen::Index>(b) * p;
    const Vector out = Vector::Ones(p) - q_[b].rowwise().sum();
    total += n_ * y.segment(at, p).dot(out);
  }
  total += n_ * y.tail(p).sum();
  return total;
}

TruncatedBlockGenerator assemble_truncated(const ProbVector &alpha, const QSequence &qs,
                                           std::size_t M) {
  if (M == 0)
    throw InvalidInput("assemble_truncated: need M >= 1");
  if (static_cast<std::size_t>(alpha.size()) != qs.dim())
    throw DimensionError("assemble_truncated: alpha does not match the Q sequence");
  std::vector<Matrix> q;
  q.reserve(M);
  RowVector v = alpha.values();
  for (std::size_t l = 1; l <= M; ++l) {
    q.push_back(qs.at(l));
    v = v * q.back();
  }
  return TruncatedBlockGenerator(alpha.values(), std::move(q), qs.rate(), v.sum());
}

namespace {

void check_cl(double rho, double nu) {
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw InvalidInput("premium rate rho must be positive");
  if (!(nu > 0.0) || !std::isfinite(nu))
    throw InvalidInput("claim intensity nu must be positive");
}

} // namespace

RowVector ladder_vector(const TruncatedBlockGenerator &gen, double rho, double nu) {
  check_cl(rho, nu);
  // x (-S) = (nu/rho) alpha: x_1 = (nu/rho) alpha / n, x_l = x_{l-1} Q_{l-1}
  const auto p = static_cast<Eigen::Index>(gen.block_size());
  RowVector x(static_cast<Eigen::Index>(gen.dim()));
  RowVector block = (nu / rho) / gen.rate() * gen.alpha();
  for (std::size_t b = 0; b < gen.blocks(); ++b) {
    if (b > 0)
      block = block * gen.q(b);
    x.segment(static_cast<Eigen::Index>(b) * p, p) = block;
  }
  return x;
}

RuinCurve ruin_curve(const TruncatedBlockGenerator &gen, double rho, double nu,
                     const std::vector<double> &u_grid, double tol) {
  if (!(tol > 0.0 && tol <= 1e-4))
    throw InvalidInput("ruin: tol must lie in (0, 1e-4]");
  for (std::size_t i = 0; i < u_grid.size(); ++i)
    if (!(u_grid[i] >= 0.0) || !std::isfinite(u_grid[i]) || (i > 0 && u_grid[i] < u_grid[i - 1]))
      throw InvalidInput("ruin: u grid must be finite, nonnegative and nondecreasing");

  RuinCurve out;
  out.u = u_grid;
  out.truncation_defect = gen.defect();
  const RowVector ladder = ladder_vector(gen, rho, nu);
  out.alpha_minus_mass = ladder.sum();
  if (out.alpha_minus_mass >= 1.0) {
    out.ruin_certain = true;
    out.psi.assign(u_grid.size(), 1.0);
    return out;
  }

  // T = S + s alpha_-, uniformized at c = n (the largest |T_ii|)
  const double c = gen.rate();
  auto step = [&](const RowVector &y) -> RowVector {
    RowVector t = gen.left_multiply(y);
    t.noalias() += gen.exit_rate(y) * ladder;
    return y + t / c;
  };
  const double step_tol = tol / static_cast<double>(std::max<std::size_t>(1, u_grid.size()));

  RowVector y = ladder;
  double previous = 0.0;
  for (double u : u_grid) {
    const double lambda = c * (u - previous);
    if (lambda > 0.0) {
      const auto K = poisson_truncation(lambda, step_tol);
      RowVector acc = std::exp(log_poisson_pmf(lambda, 0)) * y;
      RowVector power = y;
      for (std::uint64_t k = 1; k <= K; ++k) {
        power = step(power);
        acc.noalias() += std::exp(log_poisson_pmf(lambda, k)) * power;
      }
      y = std::move(acc);
    }
    out.psi.push_back(std::clamp(y.sum(), 0.0, 1.0));
    previous = u;
  }
  return out;
}

double ruin_probability(const TruncatedBlockGenerator &gen, const CLParams &cl, double tol) {
  return ruin_curve(gen, cl.rho, cl.nu, {cl.u}, tol).psi.front();
}

double ruin_probability_dense(const TruncatedBlockGenerator &gen, const CLParams &cl,
                              double tol) {
  check_cl(cl.rho, cl.nu);
  const Matrix s = gen.dense_generator();
  const Vector exit = gen.dense_exit();
  const RowVector alpha_minus =
      (cl.nu / cl.rho) * (-s).transpose().partialPivLu().solve(gen.dense_initial().transpose()).transpose();
  if (alpha_minus.sum() >= 1.0)
    return 1.0;
  const Matrix t = s + exit * alpha_minus;
  const Vector ones = Vector::Ones(s.rows());
  return std::clamp((alpha_minus * mat_exp(t, cl.u, tol) * ones)(0), 0.0, 1.0);
}

RuinMC cl_simulate(const CLParams &cl, const ClaimSampler &claims, std::size_t horizon_claims,
                   std::size_t replications, std::uint64_t seed,
                   const std::vector<double> &u_grid) {
  check_cl(cl.rho, cl.nu);
  if (replications == 0 || horizon_claims == 0)
    throw InvalidInput("cl_simulate: need positive replications and horizon");
  RuinMC out;
  out.u = u_grid.empty() ? std::vector<double>{cl.u} : u_grid;
  out.replications = replications;
  out.min_final_margin = std::numeric_limits<double>::infinity();

  // ruin before u-level capital iff the largest deficit exceeds u
  std::vector<double> deficit(replications);
  for (std::size_t r = 0; r < replications; ++r) {
    CounterRng rng(seed, r);
    double t = 0.0, total = 0.0, worst = 0.0;
    for (std::size_t k = 0; k < horizon_claims; ++k) {
      t += rng.exponential(cl.nu);
      const double x = claims(rng);
      if (!(x >= 0.0))
        throw InvalidInput("claim sampler produced a negative or NaN claim");
      total += x;
      worst = std::max(worst, total - cl.rho * t);
      if (std::isinf(worst))
        break;
    }
    deficit[r] = worst;
    out.min_final_margin = std::min(out.min_final_margin, cl.rho * t - total);
  }
  const auto reps = static_cast<double>(replications);
  for (double u : out.u) {
    const auto hits = std::count_if(deficit.begin(), deficit.end(), [u](double d) { return d > u; });
    const double p = static_cast<double>(hits) / reps;
    out.psi.push_back(p);
    out.std_error.push_back(std::sqrt(p * (1.0 - p) / reps));
  }
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Absorption time of the homogeneous chain (alpha, S); +inf for the defect
// of alpha.
double homogeneous_ph_draw(const RowVector &alpha, const Matrix &s, CounterRng &rng) {
  const auto p = alpha.size();
  double u = rng.uniform();
  Eigen::Index state = -1;
  for (Eigen::Index i = 0; i < p; ++i) {
    u -= alpha(i);
    if (u < 0.0) {
      state = i;
      break;
    }
  }
  if (state < 0)
    return kInf;
  double t = 0.0;
  for (std::size_t steps = 0; steps < 100000000; ++steps) {
    const double total = -s(state, state);
    if (total <= 0.0)
      return kInf; // trapped state that never exits
    t += rng.exponential(total);
    double v = rng.uniform() * total;
    Eigen::Index next = -1;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (j == state)
        continue;
      v -= s(state, j);
      if (v < 0.0) {
        next = j;
        break;
      }
    }
    if (next < 0)
      return t;
    state = next;
  }
  throw NumericalError("phase-type draw did not absorb");
}

// Inverse of the capped cumulative hazard.
double inverse_cumulative_hazard(const SeparableSubIntensity &sub, double y) {
  if (std::isinf(y))
    return kInf;
  const double beta = sub.beta();
  const double cap = sub.cap();
  switch (sub.family()) {
  case HazardFamily::constant:
    return y / std::min(1.0, cap);
  case HazardFamily::gompertz: {
    if (cap <= 1.0)
      return y / cap;
    const double c = std::log(cap) / beta;
    const double at_cap = (cap - 1.0) / beta;
    if (y <= at_cap)
      return std::log1p(beta * y) / beta;
    return c + (y - at_cap) / cap;
  }
  case HazardFamily::weibull: {
    if (beta == 1.0)
      return y / std::min(1.0, cap);
    if (std::isinf(cap))
      return std::pow(y, 1.0 / beta);
    const double c = std::pow(cap / beta, 1.0 / (beta - 1.0));
    if (beta > 1.0) {
      const double at_cap = std::pow(c, beta);
      return y <= at_cap ? std::pow(y, 1.0 / beta) : c + (y - at_cap) / cap;
    }
    const double at_cap = cap * c;
    return y <= at_cap ? y / cap : std::pow(y - at_cap + std::pow(c, beta), 1.0 / beta);
  }
  default:
    throw PreconditionError("no closed-form time change for this family");
  }
}

double uniformized_draw(const IPHModel &model, CounterRng &rng) {
  const double lambda0 = model.sub.bound();
  if (!std::isfinite(lambda0) || lambda0 <= 0.0)
    throw PreconditionError("exact simulation needs a finite positive bound lambda0");
  int state = -1;
  double u = rng.uniform();
  for (Eigen::Index i = 0; i < model.alpha.size(); ++i) {
    u -= model.alpha[i];
    if (u < 0.0) {
      state = static_cast<int>(i);
      break;
    }
  }
  if (state < 0)
    return kInf;
  double t = 0.0;
  for (std::size_t steps = 0; steps < 100000000; ++steps) {
    t += rng.exponential(lambda0);
    const Matrix lam = model.sub(t);
    double v = rng.uniform();
    int next = -1;
    for (Eigen::Index j = 0; j < lam.cols(); ++j) {
      v -= lam(state, j) / lambda0 + (j == state ? 1.0 : 0.0);
      if (v < 0.0) {
        next = static_cast<int>(j);
        break;
      }
    }
    if (next < 0)
      return t;
    state = next;
  }
  throw NumericalError("uniformized draw did not absorb");
}

} // namespace

ClaimSampler iph_sampler(const IPHModel &model) {
  if (const SeparableSubIntensity *sub = model.sub.separable()) {
    const auto family = sub->family();
    if (family == HazardFamily::constant || family == HazardFamily::gompertz ||
        family == HazardFamily::weibull) {
      SeparableSubIntensity copy = *sub;
      RowVector alpha = model.alpha.values();
      return [copy, alpha](CounterRng &rng) {
        return inverse_cumulative_hazard(copy, homogeneous_ph_draw(alpha, copy.base(), rng));
      };
    }
  }
  return [model](CounterRng &rng) { return uniformized_draw(model, rng); };
}

ClaimSampler mixture_sampler(const ErlangMixture &mixture) {
  std::vector<double> cumulative;
  double acc = 0.0;
  for (double w : mixture.weights) {
    acc += std::max(0.0, w);
    cumulative.push_back(acc);
  }
  const double n = mixture.rate;
  return [cumulative, n](CounterRng &rng) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end())
      return kInf;
    const auto shape = static_cast<double>(it - cumulative.begin() + 1);
    std::gamma_distribution<double> gamma(shape, 1.0 / n);
    return gamma(rng);
  };
}

} // namespace mjpa
