#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edm/facial_reduction.hpp"
#include "edm/instances.hpp"
#include "edm/pareto.hpp"
#include "edm/refine.hpp"
#include "edm/solver.hpp"

namespace py = pybind11;
using namespace edm;

namespace {

py::dict report_dict(const SolveReport& rep) {
  py::dict d;
  d["algorithm"] = rep.algorithm;
  d["residual"] = rep.residual;
  d["witness_residual"] = rep.witness_residual;
  d["trace"] = rep.trace;
  d["solve_seconds"] = rep.solve_seconds;
  d["refine_seconds"] = rep.refine_seconds;
  d["num_cliques"] = rep.num_cliques;
  d["union_fallbacks"] = rep.union_fallbacks;
  d["sigma"] = rep.sigma;
  d["beta"] = rep.beta;
  d["tau"] = rep.tau;
  d["final_slope"] = rep.final_slope;
  d["newton_bound"] = rep.newton_bound;
  d["newton_iterations"] = rep.newton_iterations;
  d["oracle_calls"] = rep.oracle_calls;
  d["fw_iterations"] = rep.fw_iterations;
  d["certified"] = rep.certified;
  d["rmsd"] = rep.rmsd ? py::cast(*rep.rmsd) : py::none();
  d["rmsd_pct_r"] = rep.rmsd_pct_r ? py::cast(*rep.rmsd_pct_r) : py::none();
  d["diagnostics"] = rep.diagnostics;
  return d;
}

PartialEdm make_graph(int n, const Eigen::MatrixXi& edges, const Eigen::VectorXd& values, int r,
                      std::optional<double> radio_range, std::optional<Points> truth) {
  if (edges.cols() != 2 || edges.rows() != values.size())
    throw Error(ErrorCode::DimensionMismatch, "edges must be k x 2 with one value per edge");
  std::vector<std::pair<Edge, double>> rows;
  for (Index k = 0; k < edges.rows(); ++k) {
    int i = edges(k, 0), j = edges(k, 1);
    if (i > j) std::swap(i, j);
    rows.push_back({{i, j}, values[k]});
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  PartialEdm g;
  g.n = n;
  g.r = r;
  for (const auto& [e, v] : rows) {
    g.d.edges.push_back(e);
    g.d.values.push_back(v);
  }
  g.radio_range = radio_range;
  if (truth) g.ground_truth = center_rows(*truth);
  g.validate();
  return g;
}

Eigen::MatrixXi edge_array(const PartialEdm& g) {
  Eigen::MatrixXi e(static_cast<Index>(g.d.size()), 2);
  for (std::size_t k = 0; k < g.d.size(); ++k) {
    e(static_cast<Index>(k), 0) = g.d.edges[k].i;
    e(static_cast<Index>(k), 1) = g.d.edges[k].j;
  }
  return e;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Noisy low-rank EDM completion";
  py::register_exception<Error>(m, "EdmError", PyExc_RuntimeError);

  m.def("k_map", [](const Matrix& x) { return k_map(SymmetricMatrix(x)).dense(); });
  m.def("k_adjoint", [](const Matrix& d) { return k_adjoint(SymmetricMatrix(d)).dense(); });
  m.def("k_pinv", [](const Matrix& d) { return k_pinv(SymmetricMatrix(d)).dense(); });
  m.def("project_centered_psd_rank",
        [](const Matrix& x, int r) { return project_centered_psd_rank(SymmetricMatrix(x), r).dense(); },
        py::arg("x"), py::arg("r"));
  m.def("procrustes_rmsd",
        [](const Points& est, const Points& truth) {
          const ProcrustesResult res = procrustes_rmsd(est, truth);
          return py::make_tuple(res.rmsd, res.rotation);
        },
        py::arg("estimate"), py::arg("truth"));

  py::class_<PartialEdm>(m, "PartialEdm")
      .def(py::init(&make_graph), py::arg("n"), py::arg("edges"), py::arg("values"), py::arg("r") = 2,
           py::arg("radio_range") = py::none(), py::arg("ground_truth") = py::none())
      .def_readonly("n", &PartialEdm::n)
      .def_readonly("r", &PartialEdm::r)
      .def_readonly("radio_range", &PartialEdm::radio_range)
      .def_readonly("ground_truth", &PartialEdm::ground_truth)
      .def_property_readonly("edges", &edge_array)
      .def_property_readonly("values", [](const PartialEdm& g) { return g.d.values; })
      .def_property_readonly("density", &PartialEdm::density)
      .def("connected", &PartialEdm::connected)
      .def("residual", [](const PartialEdm& g, const Points& p) { return g.residual(p); })
      .def("__repr__", [](const PartialEdm& g) {
        return "<PartialEdm n=" + std::to_string(g.n) + " edges=" + std::to_string(g.d.size()) + ">";
      });

  m.def("generate_instance",
        [](int n, double nf, double radio_range, std::uint64_t seed, int r) {
          return generate_instance({n, nf, radio_range, seed, r});
        },
        py::arg("n"), py::arg("nf"), py::arg("radio_range"), py::arg("seed") = 1, py::arg("r") = 2);

  m.def("read_instance", [](const std::string& path) { return read_instance(path).graph; });
  m.def("write_instance",
        [](const std::string& path, const PartialEdm& g) { write_instance(path, InstanceFile{g, {}, {}}); },
        py::arg("path"), py::arg("graph"));

  m.def("evaluate",
        [](const Points& p, const PartialEdm& g) {
          const Evaluation ev = evaluate(p, g);
          py::dict d;
          d["rmsd"] = ev.rmsd;
          d["rmsd_pct_r"] = ev.rmsd_pct_r;
          d["residual"] = ev.residual;
          return d;
        },
        py::arg("points"), py::arg("graph"));

  m.def("facial_reduction",
        [](const PartialEdm& g, int k_bar, bool clique_union) {
          FacialReductionOptions opts;
          opts.k_bar = k_bar;
          opts.clique_union = clique_union;
          FacialReductionResult res;
          {
            py::gil_scoped_release release;
            res = facial_reduction_solve(g, opts);
          }
          return py::make_tuple(res.points, report_dict(res.report));
        },
        py::arg("graph"), py::arg("k_bar") = 0, py::arg("clique_union") = true);

  m.def("pareto",
        [](const PartialEdm& g, double sigma, double beta, const std::string& mode, double alpha) {
          ParetoOptions opts;
          if (mode == "max") opts.mode = TraceMode::Max;
          else if (mode == "min") opts.mode = TraceMode::Min;
          else throw Error(ErrorCode::InvalidArgument, "mode must be 'max' or 'min'");
          opts.beta = beta;
          opts.alpha = alpha;
          ParetoResult res;
          {
            py::gil_scoped_release release;
            res = pareto_solve(g, sigma, opts);
          }
          return py::make_tuple(res.points, report_dict(res.report));
        },
        py::arg("graph"), py::arg("sigma"), py::arg("beta") = 0.1, py::arg("mode") = "max",
        py::arg("alpha") = 1.5);

  m.def("oracle",
        [](const PartialEdm& g, double tau, double sigma, double alpha, double beta) {
          const OracleTriple t = fw_oracle(g, tau, sigma, alpha, beta);
          py::dict d;
          d["tau"] = t.tau;
          d["l"] = t.l;
          d["u"] = t.u;
          d["s"] = t.s;
          d["iterations"] = t.iterations;
          d["ratio_terminated"] = t.ratio_terminated;
          d["certified"] = t.certified;
          d["witness"] = t.witness.dense();
          return d;
        },
        py::arg("graph"), py::arg("tau"), py::arg("sigma"), py::arg("alpha") = 1.5, py::arg("beta") = 0.1);

  m.def("refine",
        [](const Points& p0, const PartialEdm& g, int max_iters) {
          RefineOptions opts;
          opts.max_iters = max_iters;
          RefineResult res;
          {
            py::gil_scoped_release release;
            res = steepest_descent(p0, g, opts);
          }
          return py::make_tuple(res.points, res.objective);
        },
        py::arg("points"), py::arg("graph"), py::arg("max_iters") = 2000);
  m.def("refine_objective", &refine_objective, py::arg("points"), py::arg("graph"));
  m.def("refine_gradient", &refine_gradient, py::arg("points"), py::arg("graph"));

  m.def("solve",
        [](const PartialEdm& g, const std::string& algorithm, std::optional<double> sigma, double beta,
           bool refine, std::optional<double> noise_factor) {
          SolveOptions opts;
          opts.algorithm = parse_algorithm(algorithm);
          opts.sigma = sigma;
          opts.beta = beta;
          opts.refine = refine;
          opts.noise_factor = noise_factor;
          SolveOutcome out;
          {
            py::gil_scoped_release release;
            out = solve(g, opts);
          }
          return py::make_tuple(out.points, report_dict(out.report));
        },
        py::arg("graph"), py::arg("algorithm") = "fr", py::arg("sigma") = py::none(), py::arg("beta") = 0.1,
        py::arg("refine") = false, py::arg("noise_factor") = py::none());
}
