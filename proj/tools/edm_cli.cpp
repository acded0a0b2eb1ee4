// edm: generate instances, solve, refine, evaluate, benchmark and plot.
//
// Exit codes: 0 success, 2 solver-reported degeneracy (including a missing
// ground truth), 1 I/O or format errors.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "edm/bench.hpp"
#include "edm/instances.hpp"
#include "edm/parallel.hpp"
#include "edm/refine.hpp"
#include "edm/solver.hpp"

namespace {

using namespace edm;

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
      return 1;
    default:
      return 2;
  }
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

void print_report(const ReportEntries& entries) {
  for (const auto& [k, v] : entries) std::cerr << k << ": " << v << "\n";
}

std::optional<double> parse_sigma(const std::string& s, const PartialEdm& g) {
  if (s == "auto") return std::nullopt;
  if (s == "truth") {
    if (!g.ground_truth) throw Error(ErrorCode::NoGroundTruth, "--sigma truth needs ground truth");
    return g.residual(*g.ground_truth);
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !(v >= 0.0)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "--sigma expects auto, truth or a nonnegative number");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noisy low-rank Euclidean distance matrix completion"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random sensor-network instance");
  NoiseModelParams params;
  params.n = 0;
  std::string gen_out;
  gen->add_option("--n", params.n, "number of sensors")->required()->check(CLI::PositiveNumber);
  gen->add_option("--nf", params.nf, "noise factor")->default_val(0.0)->check(CLI::NonNegativeNumber);
  gen->add_option("--R", params.R, "radio range")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", params.seed, "random seed")->default_val(1);
  gen->add_option("--r", params.r, "embedding dimension")->default_val(2)->check(CLI::PositiveNumber);
  gen->add_option("-o,--out", gen_out, "output path (default stdout)");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "complete an instance");
  std::string solve_in, solve_out, algo = "fr", sigma = "auto";
  SolveOptions so;
  bool no_union = false;
  solve_cmd->add_option("instance", solve_in, "instance file")->required();
  solve_cmd->add_option("--algo", algo, "fr | pareto-max | pareto-min")
      ->check(CLI::IsMember({"fr", "pareto-max", "pareto-min"}));
  solve_cmd->add_option("--sigma", sigma, "misfit tolerance: auto, truth or a number");
  solve_cmd->add_option("--beta", so.beta, "misfit slack")->default_val(0.1)->check(CLI::PositiveNumber);
  solve_cmd->add_option("--kbar", so.k_bar, "largest enumerated clique (0 = 3r)")->default_val(0);
  solve_cmd->add_flag("--no-clique-union", no_union, "skip the clique union preprocessing");
  solve_cmd->add_flag("--refine", so.refine, "refine the solver output by steepest descent");
  solve_cmd->add_option("-o,--out", solve_out, "solution path (default stdout)");

  // refine
  auto* refine_cmd = app.add_subcommand("refine", "refine a solution by steepest descent");
  std::string ref_inst, ref_sol, ref_out;
  RefineOptions ro;
  refine_cmd->add_option("instance", ref_inst, "instance file")->required();
  refine_cmd->add_option("solution", ref_sol, "solution file")->required();
  refine_cmd->add_option("--max-iters", ro.max_iters, "iteration cap")->default_val(2000);
  refine_cmd->add_option("-o,--out", ref_out, "solution path (default stdout)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "compare a solution with the ground truth");
  std::string ev_inst, ev_sol;
  eval_cmd->add_option("instance", ev_inst, "instance file")->required();
  eval_cmd->add_option("solution", ev_sol, "solution file")->required();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark config");
  std::string bench_cfg, bench_out;
  bool full = false;
  unsigned jobs = 1;
  bench_cmd->add_option("config", bench_cfg, "config file: lines 'n nf R seeds algo'");
  bench_cmd->add_flag("--full", full, "use the built-in large profile");
  bench_cmd->add_option("--jobs", jobs, "parallel cells")->default_val(1)->check(CLI::PositiveNumber);
  bench_cmd->add_option("-o,--out", bench_out, "CSV path (default stdout)");

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "SVG of estimated vs true positions");
  std::string pl_inst, pl_sol, pl_out;
  plot_cmd->add_option("instance", pl_inst, "instance file with ground truth")->required();
  plot_cmd->add_option("solution", pl_sol, "solution file")->required();
  plot_cmd->add_option("-o,--out", pl_out, "SVG path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      InstanceFile inst{generate_instance(params), params.nf, params.seed};
      std::ostringstream text;
      write_instance(text, inst);
      emit(gen_out, text.str());
      std::cerr << "n " << inst.graph.n << ", edges " << inst.graph.d.size() << ", density "
                << inst.graph.density() << "\n";
    } else if (*solve_cmd) {
      const InstanceFile inst = read_instance(solve_in);
      so.algorithm = parse_algorithm(algo);
      so.clique_union = !no_union;
      so.noise_factor = inst.noise_factor;
      if (so.algorithm != Algorithm::Fr) so.sigma = parse_sigma(sigma, inst.graph);
      const SolveOutcome out = solve(inst.graph, so);
      SolutionFile sol{out.points, report_entries(out.report)};
      std::ostringstream text;
      write_solution(text, sol);
      emit(solve_out, text.str());
      print_report(sol.report);
    } else if (*refine_cmd) {
      const InstanceFile inst = read_instance(ref_inst);
      const SolutionFile in = read_solution(ref_sol);
      if (in.points.rows() != inst.graph.n || in.points.cols() != inst.graph.r)
        throw Error(ErrorCode::DimensionMismatch, "solution does not match the instance");
      const RefineResult rf = steepest_descent(in.points, inst.graph, ro);
      SolveReport rep;
      rep.algorithm = "refine";
      rep.residual = inst.graph.residual(rf.points);
      rep.refine_seconds = rf.seconds;
      attach_evaluation(rep, rf.points, inst.graph);
      SolutionFile sol{rf.points, report_entries(rep)};
      sol.report.emplace_back("refine_iterations", std::to_string(rf.iterations));
      std::ostringstream text;
      write_solution(text, sol);
      emit(ref_out, text.str());
      print_report(sol.report);
    } else if (*eval_cmd) {
      const InstanceFile inst = read_instance(ev_inst);
      const SolutionFile sol = read_solution(ev_sol);
      const Evaluation ev = evaluate(sol.points, inst.graph);
      std::cout << "rmsd " << format_double(ev.rmsd) << "\n";
      std::cout << "rmsd_pct_r " << format_double(ev.rmsd_pct_r) << "\n";
      std::cout << "residual " << format_double(ev.residual) << "\n";
    } else if (*bench_cmd) {
      std::vector<BenchConfigRow> config;
      if (full) {
        std::istringstream in(full_profile_config());
        config = parse_bench_config(in);
      } else if (!bench_cfg.empty()) {
        config = parse_bench_config_file(bench_cfg);
      } else {
        throw Error(ErrorCode::InvalidArgument, "bench needs a config file or --full");
      }
      const auto rows = run_bench(config, std::min(jobs, worker_count()));
      std::ostringstream csv;
      write_bench_csv(csv, rows);
      emit(bench_out, csv.str());
      write_bench_table(std::cerr, rows);
    } else if (*plot_cmd) {
      const InstanceFile inst = read_instance(pl_inst);
      const SolutionFile sol = read_solution(pl_sol);
      emit(pl_out, plot_svg(sol.points, inst.graph));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  }
  return 0;
}
