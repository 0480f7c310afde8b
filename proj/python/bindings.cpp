#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "critlab/arms.hpp"
#include "critlab/errors.hpp"
#include "critlab/lattice.hpp"
#include "critlab/loops.hpp"
#include "critlab/sle.hpp"
#include "critlab/spectral.hpp"
#include "experiment.hpp"

namespace py = pybind11;
using namespace critlab;

namespace {

py::dict fit_dict(const ExponentFit& f) {
  py::dict d;
  d["points"] = f.points;
  d["slope"] = f.slope;
  d["intercept"] = f.intercept;
  d["slopeStdErr"] = f.slopeStdErr;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "critical percolation, radial SLE and backbone eigenproblems";

  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  // ---- closed forms ----
  m.def("lambda_closed_form", py::overload_cast<double>(&lambda_closed_form), py::arg("kappa"));
  m.def(
      "lambda_closed_form_exact",
      [](long long num, long long den) {
        const Rational r = lambda_closed_form(Rational(num, den));
        return py::make_tuple(r.num, r.den);
      },
      py::arg("num"), py::arg("den") = 1, "(kappa^2 - 16)/(32 kappa) for kappa = num/den, as (p, q) in lowest terms");
  m.def("analytic_eigenfunction", &analytic_eigenfunction, py::arg("kappa"), py::arg("theta"));
  m.def("cardy_formula", &cardy_formula, py::arg("m"));
  m.def("cardy_rectangle", &cardy_rectangle, py::arg("aspect"));

  // ---- spectral ----
  py::class_<MeshLambda>(m, "MeshLambda")
      .def_readonly("mesh", &MeshLambda::mesh)
      .def_readonly("h", &MeshLambda::h)
      .def_readonly("lambda_", &MeshLambda::lambda)
      .def("__repr__", [](const MeshLambda& x) {
        return "MeshLambda(mesh=" + std::to_string(x.mesh) + ", lambda=" + std::to_string(x.lambda) + ")";
      });
  py::class_<Extrapolation>(m, "Extrapolation")
      .def_readonly("value", &Extrapolation::value)
      .def_readonly("assumed_order", &Extrapolation::assumedOrder)
      .def_readonly("observed_order", &Extrapolation::observedOrder)
      .def_readonly("mesh_error", &Extrapolation::meshError)
      .def_readonly("finest_error", &Extrapolation::finestError)
      .def_readonly("cauchy", &Extrapolation::cauchy)
      .def_readonly("refused", &Extrapolation::refused)
      .def_readonly("reason", &Extrapolation::reason);
  py::class_<EigenResult>(m, "EigenResult")
      .def_readonly("lambda_", &EigenResult::lambda)
      .def_readonly("mesh_trace", &EigenResult::meshTrace)
      .def_readonly("extrapolation", &EigenResult::extrapolation)
      .def_readonly("x", &EigenResult::x)
      .def_readonly("y", &EigenResult::y)
      .def_readonly("eigenfunction", &EigenResult::eigenfunction)
      .def_readonly("residual", &EigenResult::residual)
      .def_readonly("iterations", &EigenResult::iterations);

  m.def(
      "solve_eigen_1d",
      [](double kappa, int n, const std::string& method, int levels) {
        Eigen1dOptions o;
        o.method = parse_eigen_method(method);
        o.levels = levels;
        return solve_eigen_1d(kappa, n, o);
      },
      py::arg("kappa"), py::arg("n") = 4095, py::arg("method") = "directEigen", py::arg("levels") = 3);
  m.def("richardson",
        [](const std::vector<std::pair<int, double>>& trace, double assumedOrder, double maxDev, double floor) {
          std::vector<MeshLambda> t;
          for (auto [mesh, lam] : trace) t.push_back({mesh, 1.0 / mesh, lam});
          return richardson(t, assumedOrder, maxDev, floor);
        },
        py::arg("trace"), py::arg("assumed_order"), py::arg("max_order_deviation") = 0.5, py::arg("noise_floor") = 0.0,
        "trace: (mesh, lambda) pairs with mesh width 1/mesh");

  auto backbone = [](bool symmetric) {
    return [symmetric](const std::vector<int>& meshes, const std::string& method, const std::string& edge,
                       double assumedOrder) {
      BackboneOptions o;
      o.method = parse_eigen_method(method);
      o.edge = parse_edge_mode(edge);
      o.assumedOrder = assumedOrder;
      return symmetric ? solve_backbone_symmetric(meshes, o) : solve_backbone_2d(meshes, o);
    };
  };
  m.def("solve_backbone_2d", backbone(false), py::arg("meshes"), py::arg("method") = "timeDecay",
        py::arg("edge") = "shared", py::arg("assumed_order") = 0.5);
  m.def("solve_backbone_symmetric", backbone(true), py::arg("meshes"), py::arg("method") = "timeDecay",
        py::arg("edge") = "shared", py::arg("assumed_order") = 0.5);
  m.def("cardy_profile_deviation", &cardy_profile_deviation, py::arg("result"), py::arg("s_lo"), py::arg("s_hi"));

  // ---- lattice and arms ----
  py::enum_<Metric>(m, "Metric").value("graph", Metric::graph).value("euclidean", Metric::euclidean);
  py::class_<Region>(m, "Region")
      .def_static("disk", &Region::disk, py::arg("R"), py::arg("metric") = Metric::graph)
      .def_static("annulus", &Region::annulus, py::arg("R1"), py::arg("R2"), py::arg("metric") = Metric::graph)
      .def_static("half_plane_annulus", &Region::half_plane_annulus, py::arg("r"), py::arg("R"),
                  py::arg("metric") = Metric::graph)
      .def_static("strip", &Region::strip, py::arg("R"))
      .def_static("rhombus", &Region::rhombus, py::arg("L"))
      .def_static("rectangle", &Region::rectangle, py::arg("W"), py::arg("H"))
      .def("sites", [](const Region& r) {
        std::vector<std::pair<int, int>> out;
        for (Site s : region_sites(r)) out.emplace_back(s.a, s.b);
        return out;
      });

  py::class_<Configuration>(m, "Configuration")
      .def_static("sample", &Configuration::sample, py::arg("region"), py::arg("p"), py::arg("seed"))
      .def_static("from_states", &Configuration::from_states, py::arg("region"), py::arg("states"))
      .def("states", &Configuration::states)
      .def("is_open", [](const Configuration& c, int a, int b) {
        require(c.contains({a, b}), "site outside the configuration");
        return c.is_open({a, b});
      });
  m.def("cluster_count", [](const Configuration& c) { return label_clusters(c).clusterCount; });
  m.def("event_one_arm", &event_one_arm, py::arg("config"), py::arg("R"));
  m.def("event_annulus_crossing", &event_annulus_crossing, py::arg("config"), py::arg("R1"), py::arg("R2"));
  m.def("event_circuit", &event_circuit, py::arg("config"), py::arg("R"));
  m.def("event_disjoint_open_arms", &event_disjoint_open_arms, py::arg("config"), py::arg("k"), py::arg("r"),
        py::arg("R"), py::arg("half_plane") = false);
  m.def(
      "event_multichromatic_arms",
      [](const Configuration& c, const std::vector<std::string>& colors, int r, int R, bool halfPlane) {
        std::vector<Color> cs;
        for (const auto& s : colors) cs.push_back(parse_color(s));
        return event_multichromatic_arms(c, cs, r, R, halfPlane);
      },
      py::arg("config"), py::arg("colors"), py::arg("r"), py::arg("R"), py::arg("half_plane") = false);
  m.def("strip_cluster_count", &strip_cluster_count, py::arg("config"), py::arg("R"));

  py::class_<McEstimate>(m, "McEstimate")
      .def_readonly("trials", &McEstimate::trials)
      .def_readonly("hits", &McEstimate::hits)
      .def_readonly("p_hat", &McEstimate::pHat)
      .def_readonly("std_err", &McEstimate::stdErr)
      .def_readonly("seed", &McEstimate::seed);
  m.def(
      "mc_one_arm",
      [](int R, double p, long trials, std::uint64_t seed, int workers) {
        return mc_estimate(ArmEventSpec::one_arm(R), p, trials, seed, workers);
      },
      py::arg("R"), py::arg("p") = 0.5, py::arg("trials") = 1000, py::arg("seed") = 1, py::arg("workers") = 1);
  m.def(
      "mc_rectangle",
      [](double W, double H, double p, long trials, std::uint64_t seed, int workers) {
        return mc_estimate(ArmEventSpec::rectangle(W, H), p, trials, seed, workers);
      },
      py::arg("W"), py::arg("H"), py::arg("p") = 0.5, py::arg("trials") = 1000, py::arg("seed") = 1,
      py::arg("workers") = 1);
  m.def(
      "fit_exponent", [](const std::vector<std::pair<double, double>>& pts) { return fit_dict(fit_exponent(pts)); },
      py::arg("points"));

  // ---- SLE and the Y-process ----
  m.def(
      "sample_trace",
      [](double kappa, double dt, double horizon, std::uint64_t seed) {
        const auto ev = evolve_radial(sample_driving(kappa, dt, horizon, seed));
        py::dict d;
        d["points"] = ev.trace.points;
        d["times"] = ev.trace.times;
        d["elapsed"] = ev.state.elapsed;
        d["deriv_at_zero"] = ev.state.derivAtZero;
        d["max_deriv_rel_err"] = ev.state.maxDerivRelErr;
        d["koebe"] = koebe_check(ev.state, ev.trace);
        return d;
      },
      py::arg("kappa"), py::arg("dt"), py::arg("horizon"), py::arg("seed"));
  m.def(
      "simulate_Y",
      [](double kappa, double theta0, double dt, double horizon, const std::string& boundary, std::uint64_t seed) {
        const auto p = simulate_Y(kappa, theta0, dt, horizon, parse_boundary(boundary), seed);
        py::dict d;
        d["times"] = p.times;
        d["path"] = p.path;
        d["kill_time"] = p.killTime ? py::cast(*p.killTime) : py::none();
        return d;
      },
      py::arg("kappa"), py::arg("theta0"), py::arg("dt"), py::arg("horizon"), py::arg("boundary") = "reflect",
      py::arg("seed") = 1);
  m.def(
      "loop_free_exponent",
      [](double kappa, const std::string& method, long paths, double dt, std::uint64_t seed, int workers) {
        LoopExponentParams p;
        p.paths = paths;
        p.dt = dt;
        p.seed = seed;
        p.workers = workers;
        const auto e = estimate_loop_free_exponent(kappa, parse_loop_method(method), p);
        py::dict d;
        d["exponent"] = e.exponent;
        d["std_err"] = e.stdErr;
        d["no_decay"] = e.noDecay;
        d["fit"] = fit_dict(e.fit);
        return d;
      },
      py::arg("kappa"), py::arg("method") = "diffusion", py::arg("paths") = 10000, py::arg("dt") = 0.02,
      py::arg("seed") = 1, py::arg("workers") = 1);

  // ---- experiments, as the command line runs them ----
  m.def(
      "run_experiment",
      [](const std::string& engine, const std::string& config, std::optional<std::uint64_t> seed,
         std::optional<int> workers) {
        std::istringstream in(config);
        auto cfg = cli::make_config(engine, cli::KeyValues::parse(in, "config"), seed, workers);
        py::gil_scoped_release release;
        return cli::to_json(cli::run_experiment(cfg)).dump();
      },
      py::arg("engine"), py::arg("config") = "", py::arg("seed") = py::none(), py::arg("workers") = py::none(),
      "runs an engine on key=value text and returns the json record");

  m.attr("__version__") = cli::artifact_version();
}
