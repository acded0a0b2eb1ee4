#include "edm/solver.hpp"

#include "edm/instances.hpp"

namespace edm {

Algorithm parse_algorithm(const std::string& name) {
  if (name == "fr") return Algorithm::Fr;
  if (name == "pareto-max") return Algorithm::ParetoMax;
  if (name == "pareto-min") return Algorithm::ParetoMin;
  throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + name + "' (fr|pareto-max|pareto-min)");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Fr: return "fr";
    case Algorithm::ParetoMax: return "pareto-max";
    case Algorithm::ParetoMin: return "pareto-min";
  }
  return "?";
}

double auto_sigma(const PartialEdm& g, std::optional<double> noise_factor) {
  try {
    FacialReductionOptions fo;
    if (noise_factor) fo.noise_factor_estimate = *noise_factor;
    return facial_reduction_solve(g, fo).report.residual;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DeficientAggregate && e.code() != ErrorCode::CliqueTooSmall) throw;
  }
  return 1.1 * noise_factor.value_or(0.1) * g.norm_d();
}

SolveOutcome solve(const PartialEdm& g, const SolveOptions& opts) {
  SolveOutcome out;
  if (opts.algorithm == Algorithm::Fr) {
    FacialReductionOptions fo;
    fo.k_bar = opts.k_bar;
    fo.clique_union = opts.clique_union;
    if (opts.noise_factor) fo.noise_factor_estimate = *opts.noise_factor;
    FacialReductionResult r = facial_reduction_solve(g, fo);
    out.initial = std::move(r.points);
    out.report = std::move(r.report);
  } else {
    const double sigma = opts.sigma ? *opts.sigma : auto_sigma(g, opts.noise_factor);
    ParetoOptions po;
    po.mode = opts.algorithm == Algorithm::ParetoMax ? TraceMode::Max : TraceMode::Min;
    po.alpha = opts.alpha;
    po.beta = opts.beta;
    ParetoResult r = pareto_solve(g, sigma, po);
    out.initial = std::move(r.points);
    out.report = std::move(r.report);
  }
  if (g.ground_truth) {
    attach_evaluation(out.report, out.initial, g);
    out.initial_rmsd_pct_r = out.report.rmsd_pct_r;
  }
  out.points = out.initial;
  if (opts.refine) {
    RefineResult rf = steepest_descent(out.initial, g, opts.refine_options);
    out.points = std::move(rf.points);
    out.report.refine_seconds = rf.seconds;
    out.report.residual = g.residual(out.points);
    if (g.ground_truth) attach_evaluation(out.report, out.points, g);
  }
  return out;
}

}  // namespace edm
