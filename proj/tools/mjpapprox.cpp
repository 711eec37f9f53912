// mjpapprox: command line front end for the mjpa library.
#include "mjpa/errors.hpp"
#include "mjpa/grid.hpp"
#include "mjpa/io.hpp"
#include "mjpa/iph.hpp"
#include "mjpa/mph.hpp"
#include "mjpa/qseq.hpp"
#include "mjpa/ruin.hpp"
#include "mjpa/transition.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using namespace mjpa;

namespace {

constexpr int kSchemaExit = 2;
constexpr int kNumericalExit = 3;

struct Common {
  std::string out;
  std::uint64_t seed = 0;
};

class Output {
public:
  explicit Output(const std::string &path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_)
        throw InvalidInput("cannot write '" + path + "'");
    }
  }
  std::ostream &stream() { return file_ ? *file_ : std::cout; }

  void header(std::initializer_list<std::string> names) {
    bool first = true;
    for (const auto &n : names) {
      stream() << (first ? "" : ",") << n;
      first = false;
    }
    stream() << '\n';
  }

  void row(const std::vector<double> &values) {
    for (std::size_t k = 0; k < values.size(); ++k)
      stream() << (k ? "," : "") << format_double(values[k]);
    stream() << '\n';
  }

private:
  std::unique_ptr<std::ofstream> file_;
};

void meta(const std::string &key, double value) {
  std::cerr << "# " << key << " = " << format_double(value) << '\n';
}

void meta(const std::string &key, const std::string &value) {
  std::cerr << "# " << key << " = " << value << '\n';
}

QSequence make_sequence(const IntensityFunction &f, double n, const std::string &variant,
                        std::size_t grid_length, std::uint64_t seed, QPolicy policy) {
  switch (q_variant_from_string(variant)) {
  case QVariant::tilde:
    return QSequence::tilde(f, n, policy);
  case QVariant::hat:
    return QSequence::hat(f, n, policy);
  case QVariant::conditional:
    return QSequence::conditional(f, sample_grid(n, grid_length, seed), policy);
  default:
    throw InvalidInput("variant must be tilde, hat or conditional");
  }
}

QPolicy policy_from(bool permissive) { return permissive ? QPolicy::permissive : QPolicy::strict; }

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Uniformized approximations of inhomogeneous Markov jump processes"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--out", common.out, "Write CSV here instead of stdout");
  app.add_option("--seed", common.seed, "Seed for every random draw");

  std::string model_path, variant = "tilde", data_path, estimator = "nelson-aalen";
  std::string grid_spec, u_grid_spec, grid_x, grid_y, n_list, mixture_out;
  std::vector<std::string> extra_grids;
  double n = 0.0, s = 0.0, t = 1.0, tol = 1e-10, rho = 0.0, nu = 0.0, eps = 0.5, T = 1.0;
  double mass_tol = 1e-10;
  std::size_t trunc = 0, mc = 0, reps = 200, points = 4, horizon = 20000;
  bool permissive = false;

  auto *transition = app.add_subcommand("transition", "P^(n)(s, t) as a CSV of entries");
  transition->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  transition->add_option("--n", n)->required();
  transition->add_option("--s", s);
  transition->add_option("--t", t);
  transition->add_option("--variant", variant);
  transition->add_option("--tol", tol, "Poisson tail tolerance");
  transition->add_flag("--permissive", permissive, "Keep invalid Q matrices and count them");

  auto *iph = app.add_subcommand("iph-density", "Erlang mixture density and cdf on a grid");
  iph->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  iph->add_option("--n", n)->required();
  iph->add_option("--trunc", trunc, "Largest Erlang shape")->required();
  iph->add_option("--grid", grid_spec, "start:stop:step")->required();
  iph->add_option("--mass-tol", mass_tol);
  iph->add_option("--mixture-json", mixture_out, "Also save the mixture as JSON");
  iph->add_flag("--permissive", permissive);

  auto *hazard = app.add_subcommand("hazard-fit", "Density estimate from a positive sample");
  hazard->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  hazard->add_option("--n", n)->required();
  hazard->add_option("--estimator", estimator, "nelson-aalen or neg-log-ecdf");
  hazard->add_option("--trunc", trunc, "Largest Erlang shape (default ceil(n max))");
  hazard->add_option("--grid", grid_spec, "start:stop:step (default 0:max:max/200)");
  hazard->add_option("--mixture-json", mixture_out);

  auto *ruin = app.add_subcommand("ruin", "Cramer-Lundberg ruin probabilities");
  ruin->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  ruin->add_option("--n", n)->required();
  ruin->add_option("--trunc", trunc, "Number of Erlang blocks")->required();
  ruin->add_option("--rho", rho, "Premium rate")->required();
  ruin->add_option("--nu", nu, "Claim arrival rate")->required();
  ruin->add_option("--u-grid", u_grid_spec)->required();
  ruin->add_option("--tol", tol);
  ruin->add_option("--mc", mc, "Monte Carlo replications (0: none)");
  ruin->add_option("--horizon", horizon, "Claims simulated per path");
  ruin->add_flag("--permissive", permissive);

  auto *mph = app.add_subcommand("mph-density", "Joint density of reward integrals on a grid");
  mph->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  mph->add_option("--n", n)->required();
  mph->add_option("--trunc", trunc, "Depth of the profile recursion")->required();
  mph->add_option("--grid-x", grid_x, "Grid of margin 1")->required();
  mph->add_option("--grid-y", grid_y, "Grid of margin 2");
  mph->add_option("--grid", extra_grids, "Grids of margins 3, 4, ...");
  mph->add_flag("--permissive", permissive);

  auto *rate = app.add_subcommand("rate-experiment", "Grid discrepancy quantiles");
  rate->add_option("--n", n_list, "Comma-separated n values")->required();
  rate->add_option("--eps", eps);
  rate->add_option("--reps", reps);

  auto *scan = app.add_subcommand("error-scan", "sup error of P^(n) against the reference");
  scan->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  scan->add_option("--n", n_list, "Comma-separated n values")->required();
  scan->add_option("--T", T);
  scan->add_option("--variant", variant);
  scan->add_option("--tol", tol);
  scan->add_option("--points", points);
  scan->add_flag("--permissive", permissive);

  for (auto *sub : app.get_subcommands({}))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kSchemaExit;
  }

  try {
    Output out(common.out);
    meta("seed", std::to_string(common.seed));

    if (*transition) {
      const auto spec = load_model(model_path);
      const auto model = spec.model();
      const std::size_t length = poisson_truncation(n * s, tol / 2) +
                                 poisson_truncation(n * (t - s), tol / 2) + 2;
      const auto qs =
          make_sequence(model.sub, n, variant, length, common.seed, policy_from(permissive));
      const auto res = transition_series(qs, s, t, tol);
      meta("variant", variant);
      meta("tail_tol", tol);
      meta("truncation_defect", res.truncation_defect);
      meta("K_s", static_cast<double>(res.Ks));
      meta("K_t", static_cast<double>(res.Kt));
      meta("q_violations", static_cast<double>(qs.violations()));
      out.header({"i", "j", "p"});
      for (Eigen::Index i = 0; i < res.P.rows(); ++i)
        for (Eigen::Index j = 0; j < res.P.cols(); ++j)
          out.row({double(i), double(j), res.P(i, j)});
    } else if (*iph) {
      const auto spec = load_model(model_path);
      const auto model = spec.model();
      const auto qs = QSequence::tilde(model.sub, n, policy_from(permissive));
      const auto mix = iph_weights(model.alpha, qs, trunc, mass_tol);
      const auto ts = parse_grid(grid_spec);
      const auto pdf = mixture_pdf(mix, ts);
      const auto cdf = mixture_cdf(mix, ts);
      meta("terms", static_cast<double>(mix.weights.size()));
      meta("mass_tol", mass_tol);
      meta("defect", mix.defect);
      meta("q_violations", static_cast<double>(qs.violations()));
      if (!mixture_out.empty())
        std::ofstream(mixture_out) << mixture_to_json(mix) << '\n';
      out.header({"t", "pdf", "cdf"});
      for (std::size_t k = 0; k < ts.size(); ++k)
        out.row({ts[k], pdf[k], cdf[k]});
    } else if (*hazard) {
      const auto sample = read_sample(data_path);
      std::optional<std::size_t> L;
      if (trunc > 0)
        L = trunc;
      const auto fit = hazard_density_estimate(sample, n, L,
                                               hazard_estimator_from_string(estimator));
      const double top = *std::max_element(sample.begin(), sample.end());
      const auto ts = grid_spec.empty() ? parse_grid("0:" + format_double(top) + ":" +
                                                     format_double(top / 200.0))
                                        : parse_grid(grid_spec);
      const auto pdf = mixture_pdf(fit.mixture, ts);
      const auto cdf = mixture_cdf(fit.mixture, ts);
      meta("observations", static_cast<double>(sample.size()));
      meta("estimator", estimator);
      meta("terms", static_cast<double>(fit.mixture.weights.size()));
      meta("defect", fit.mixture.defect);
      meta("clamped", static_cast<double>(fit.clamped));
      if (!mixture_out.empty())
        std::ofstream(mixture_out) << mixture_to_json(fit.mixture) << '\n';
      out.header({"t", "pdf", "cdf"});
      for (std::size_t k = 0; k < ts.size(); ++k)
        out.row({ts[k], pdf[k], cdf[k]});
    } else if (*ruin) {
      const auto spec = load_model(model_path);
      const auto model = spec.model();
      const auto qs = QSequence::tilde(model.sub, n, policy_from(permissive));
      const auto gen = assemble_truncated(model.alpha, qs, trunc);
      const auto us = parse_grid(u_grid_spec);
      const auto curve = ruin_curve(gen, rho, nu, us, tol);
      meta("truncation_defect", curve.truncation_defect);
      meta("tol", tol);
      meta("alpha_minus_mass", curve.alpha_minus_mass);
      std::optional<RuinMC> sim;
      if (mc > 0) {
        sim = cl_simulate(CLParams{rho, nu, 0.0}, iph_sampler(model), horizon, mc, common.seed,
                          us);
        meta("mc_replications", static_cast<double>(mc));
        meta("mc_horizon_claims", static_cast<double>(horizon));
        meta("mc_min_final_margin", sim->min_final_margin);
      }
      out.header({"u", "psi_approx", "psi_mc", "mc_stderr"});
      const double nan = std::nan("");
      for (std::size_t k = 0; k < us.size(); ++k)
        out.row({us[k], curve.psi[k], sim ? sim->psi[k] : nan, sim ? sim->std_error[k] : nan});
    } else if (*mph) {
      const auto spec = load_model(model_path);
      const auto model = spec.model();
      const auto r = spec.rewards();
      const auto qs = QSequence::tilde(model.sub, n, policy_from(permissive));
      const auto profiles = alpha_recursion(spec.initial(), qs, trunc);
      std::vector<std::vector<double>> grids{parse_grid(grid_x)};
      if (!grid_y.empty())
        grids.push_back(parse_grid(grid_y));
      for (const auto &g : extra_grids)
        grids.push_back(parse_grid(g));
      if (grids.size() != r.margins())
        throw InvalidInput("need one grid per reward column (" + std::to_string(r.margins()) +
                           "), got " + std::to_string(grids.size()));
      const auto dens = mph_density_grid(grids, profiles, r);
      meta("profiles", static_cast<double>(profiles.profile_count()));
      meta("defect", dens.defect);
      meta("excluded_mass", dens.excluded_mass);
      meta("excluded_profiles", static_cast<double>(dens.excluded_profiles));
      meta("q_violations", static_cast<double>(qs.violations()));
      std::ostream &os = out.stream();
      for (std::size_t k = 0; k < grids.size(); ++k)
        os << 'x' << k + 1 << ',';
      os << "f\n";
      std::vector<std::size_t> idx(grids.size(), 0);
      for (double f : dens.values) {
        std::vector<double> row;
        for (std::size_t k = 0; k < grids.size(); ++k)
          row.push_back(grids[k][idx[k]]);
        row.push_back(f);
        out.row(row);
        for (std::size_t k = grids.size(); k-- > 0;) {
          if (++idx[k] < grids[k].size())
            break;
          idx[k] = 0;
        }
      }
    } else if (*rate) {
      const auto rows = rate_experiment(parse_list(n_list), eps, reps, common.seed);
      meta("replications", static_cast<double>(reps));
      meta("epsilon", eps);
      out.header({"n", "epsilon", "q50", "q90", "q99", "normalizer"});
      for (const auto &r : rows)
        out.row({r.n, r.epsilon, r.q50, r.q90, r.q99, r.normalizer});
    } else if (*scan) {
      const auto spec = load_model(model_path);
      const auto model = spec.model();
      const auto rows = unconditional_error_scan(model.sub, parse_list(n_list), T,
                                                 q_variant_from_string(variant), tol, points,
                                                 common.seed, policy_from(permissive));
      meta("variant", variant);
      meta("tail_tol", tol);
      meta("T", T);
      out.header({"n", "sup_error"});
      for (const auto &r : rows)
        out.row({r.n, r.sup_error});
    }
  } catch (const SchemaError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSchemaExit;
  } catch (const NumericalError &e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalExit;
  } catch (const DomainError &e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalExit;
  } catch (const DegenerateMargin &e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalExit;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSchemaExit;
  }
  return 0;
}
