#pragma once

// One-call front end shared by the CLI, the bench harness and the Python
// module: pick an algorithm, solve, optionally refine, evaluate.

#include <optional>
#include <string>

#include "edm/facial_reduction.hpp"
#include "edm/pareto.hpp"
#include "edm/problem.hpp"
#include "edm/refine.hpp"

namespace edm {

enum class Algorithm { Fr, ParetoMax, ParetoMin };

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm a);

struct SolveOptions {
  Algorithm algorithm = Algorithm::Fr;
  /// Misfit tolerance for the Pareto solvers; unset means auto_sigma.
  std::optional<double> sigma;
  double beta = 0.1;
  double alpha = 1.5;
  int k_bar = 0;
  bool clique_union = true;
  /// Noise factor known from the instance header, used by auto_sigma and the
  /// clique union slack.
  std::optional<double> noise_factor;
  bool refine = false;
  RefineOptions refine_options{};
};

/// Residual of a facial reduction pass, or 1.1 nf ||d|| when that fails
/// (nf defaults to 0.1 when unknown).
double auto_sigma(const PartialEdm& g, std::optional<double> noise_factor);

struct SolveOutcome {
  Points initial;  // solver output
  Points points;   // refined when requested, else the solver output
  SolveReport report;
  std::optional<double> initial_rmsd_pct_r;
};

SolveOutcome solve(const PartialEdm& g, const SolveOptions& opts);

}  // namespace edm
