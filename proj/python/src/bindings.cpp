#include "mjpa/errors.hpp"
#include "mjpa/grid.hpp"
#include "mjpa/io.hpp"
#include "mjpa/iph.hpp"
#include "mjpa/mph.hpp"
#include "mjpa/ruin.hpp"
#include "mjpa/transition.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace mjpa;

namespace {

IPHModel make_model(const RowVector &alpha, const Matrix &S, const std::string &family,
                    double beta, double cap, std::vector<std::pair<double, double>> table) {
  return separable_model(ProbVector(alpha), SeparableSubIntensity(S, hazard_family_from_string(family),
                                                                  beta, cap, std::move(table)));
}

QSequence make_sequence(const IPHModel &m, double n, const std::string &variant,
                        bool permissive, std::size_t grid_length, std::uint64_t seed) {
  const auto policy = permissive ? QPolicy::permissive : QPolicy::strict;
  switch (q_variant_from_string(variant)) {
  case QVariant::tilde:
    return QSequence::tilde(m.sub, n, policy);
  case QVariant::hat:
    return QSequence::hat(m.sub, n, policy);
  case QVariant::conditional:
    return QSequence::conditional(m.sub, sample_grid(n, grid_length, seed), policy);
  default:
    throw InvalidInput("variant must be tilde, hat or conditional");
  }
}

} // namespace

PYBIND11_MODULE(_mjpapprox, m) {
  m.doc() = "Uniformized approximations of inhomogeneous Markov jump processes";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<DegenerateMargin>(m, "DegenerateMargin", PyExc_ArithmeticError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_MemoryError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);

  m.def("mat_exp", &mat_exp, py::arg("a"), py::arg("t"), py::arg("tol") = 1e-14);

  py::class_<IPHModel>(m, "Model")
      .def(py::init(&make_model), py::arg("alpha"), py::arg("S"), py::arg("family") = "constant",
           py::arg("beta") = 1.0, py::arg("cap") = kDefaultCap,
           py::arg("table") = std::vector<std::pair<double, double>>{})
      .def_static(
          "from_json",
          [](const std::string &text) { return parse_model(text).model(); }, py::arg("text"))
      .def_property_readonly("alpha", [](const IPHModel &x) { return x.alpha.values(); })
      .def_property_readonly("bound", [](const IPHModel &x) { return x.sub.bound(); })
      .def("intensity", [](const IPHModel &x, double t) { return x.sub(t); }, py::arg("t"))
      .def("exit_vector", &IPHModel::exit_vector, py::arg("t"));

  py::class_<QSequence>(m, "QSequence")
      .def(py::init(&make_sequence), py::arg("model"), py::arg("n"),
           py::arg("variant") = "tilde", py::arg("permissive") = false,
           py::arg("grid_length") = 0, py::arg("seed") = 0)
      .def("__getitem__", &QSequence::at, py::arg("ell"))
      .def_property_readonly("rate", &QSequence::rate)
      .def_property_readonly("violations", &QSequence::violations);

  py::class_<TransitionResult>(m, "TransitionResult")
      .def_readonly("P", &TransitionResult::P)
      .def_readonly("truncation_defect", &TransitionResult::truncation_defect)
      .def_readonly("Ks", &TransitionResult::Ks)
      .def_readonly("Kt", &TransitionResult::Kt);

  m.def(
      "transition_series",
      [](const QSequence &qs, double s, double t, double tol) {
        return transition_series(qs, s, t, tol);
      },
      py::arg("qs"), py::arg("s"), py::arg("t"), py::arg("tail_tol") = 1e-12);
  m.def(
      "product_integral",
      [](const IPHModel &model, double s, double t, double step_tol) {
        return product_integral(model.sub, s, t, step_tol);
      },
      py::arg("model"), py::arg("s"), py::arg("t"), py::arg("step_tol") = 1e-10);

  py::class_<ErlangMixture>(m, "ErlangMixture")
      .def_readonly("rate", &ErlangMixture::rate)
      .def_readonly("weights", &ErlangMixture::weights)
      .def_readonly("defect", &ErlangMixture::defect)
      .def("pdf", py::overload_cast<const ErlangMixture &, const std::vector<double> &>(
                      &mixture_pdf))
      .def("cdf", py::overload_cast<const ErlangMixture &, const std::vector<double> &>(
                      &mixture_cdf))
      .def("mean", &mixture_mean)
      .def("to_json", &mixture_to_json)
      .def_static("from_json", &mixture_from_json);

  m.def(
      "iph_weights",
      [](const IPHModel &model, const QSequence &qs, std::size_t L_max, double mass_tol) {
        return iph_weights(model.alpha, qs, L_max, mass_tol);
      },
      py::arg("model"), py::arg("qs"), py::arg("L_max"), py::arg("mass_tol") = 1e-10);
  m.def("oracle_density", &oracle_density, py::arg("model"), py::arg("ts"),
        py::arg("step_tol") = 1e-11);
  m.def(
      "hazard_fit",
      [](const std::vector<double> &sample, double n, const std::string &estimator) {
        return hazard_density_estimate(sample, n, std::nullopt,
                                       hazard_estimator_from_string(estimator))
            .mixture;
      },
      py::arg("sample"), py::arg("n"), py::arg("estimator") = "nelson-aalen");

  m.def(
      "ruin_curve",
      [](const IPHModel &model, const QSequence &qs, std::size_t M, double rho, double nu,
         const std::vector<double> &us, double tol) {
        const auto gen = assemble_truncated(model.alpha, qs, M);
        const auto c = ruin_curve(gen, rho, nu, us, tol);
        return py::make_tuple(c.psi, c.truncation_defect);
      },
      py::arg("model"), py::arg("qs"), py::arg("trunc"), py::arg("rho"), py::arg("nu"),
      py::arg("u"), py::arg("tol") = 1e-10,
      "Returns (psi values, truncation defect).");
  m.def(
      "ruin_mc",
      [](const IPHModel &model, double rho, double nu, const std::vector<double> &us,
         std::size_t reps, std::uint64_t seed, std::size_t horizon) {
        const auto r = cl_simulate(CLParams{rho, nu, 0.0}, iph_sampler(model), horizon, reps,
                                   seed, us);
        return py::make_tuple(r.psi, r.std_error);
      },
      py::arg("model"), py::arg("rho"), py::arg("nu"), py::arg("u"), py::arg("replications"),
      py::arg("seed") = 0, py::arg("horizon_claims") = 2000,
      "Returns (psi estimates, standard errors).");

  py::class_<MphProfiles>(m, "MphProfiles")
      .def_readonly("rate", &MphProfiles::rate)
      .def_readonly("defect", &MphProfiles::defect)
      .def_property_readonly("depth", &MphProfiles::depth)
      .def_property_readonly("profile_count", &MphProfiles::profile_count)
      .def_property_readonly("rho_total", [](const MphProfiles &p) {
        double s = 0.0;
        for (const auto &level : p.levels)
          for (const auto &w : level)
            s += w.rho;
        return s;
      });
  m.def(
      "alpha_recursion",
      [](const RowVector &pi, const QSequence &qs, std::size_t D) {
        return alpha_recursion(ProbVector(pi), qs, D);
      },
      py::arg("pi"), py::arg("qs"), py::arg("depth"));
  m.def(
      "mph_density",
      [](const std::vector<std::vector<double>> &grids, const MphProfiles &profiles,
         const Matrix &R) {
        const auto d = mph_density_grid(grids, profiles, RewardMatrix(R));
        return py::make_tuple(d.values, d.excluded_mass);
      },
      py::arg("grids"), py::arg("profiles"), py::arg("R"),
      "Returns (values row-major over the grid product, excluded mass).");
  m.def(
      "mph_mean",
      [](const MphProfiles &profiles, const Matrix &R, std::size_t k) {
        return mph_mixture_mean(profiles, RewardMatrix(R), k);
      },
      py::arg("profiles"), py::arg("R"), py::arg("margin"));
  m.def(
      "mph_simulate",
      [](const IPHModel &model, const RowVector &pi, const Matrix &R, std::size_t reps,
         std::uint64_t seed) {
        return mph_simulate(ProbVector(pi), model.sub, RewardMatrix(R),
                            MphSimulationMode::exact, reps, seed)
            .rows;
      },
      py::arg("model"), py::arg("pi"), py::arg("R"), py::arg("replications"),
      py::arg("seed") = 0);

  m.def(
      "rate_experiment",
      [](const std::vector<double> &ns, double eps, std::size_t reps, std::uint64_t seed) {
        py::list out;
        for (const auto &r : rate_experiment(ns, eps, reps, seed)) {
          py::dict d;
          d["n"] = r.n;
          d["q50"] = r.q50;
          d["q90"] = r.q90;
          d["q99"] = r.q99;
          d["normalizer"] = r.normalizer;
          out.append(d);
        }
        return out;
      },
      py::arg("n_values"), py::arg("epsilon"), py::arg("replications"), py::arg("seed") = 0);
}
