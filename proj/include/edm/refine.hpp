#pragma once

// Local refinement of a realization by steepest descent on the factored
// objective F(P) = || P K(P P^T) - d ||^2.

#include <vector>

#include "edm/linalg.hpp"
#include "edm/problem.hpp"

namespace edm {

struct RefineOptions {
  int max_iters = 2000;
  /// Stop when ||grad F|| <= grad_tol * ||d||.
  double grad_tol = 1e-9;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  /// Largest trial step, relative to ||P|| / ||grad F||.
  double step_cap = 1e3;
  /// Also stop after `stall_window` consecutive steps each decreasing F by
  /// less than stall_tol * F (rounding-level progress).
  double stall_tol = 1e-13;
  int stall_window = 10;
};

struct RefineResult {
  Points points;
  std::vector<double> objective;  // F at every accepted iterate, starting with F(P0)
  int iterations = 0;
  bool converged = false;  // gradient tolerance reached
  bool stalled = false;    // stopped on the stall rule
  double seconds = 0.0;
};

double refine_objective(const Points& p, const PartialEdm& g);

/// grad_i F = 4 sum_{ij in E} (||p_i - p_j||^2 - d_ij) (p_i - p_j).
Points refine_gradient(const Points& p, const PartialEdm& g);

/// Barzilai-Borwein trial steps with Armijo backtracking; monotone. The
/// result is re-centered.
RefineResult steepest_descent(const Points& p0, const PartialEdm& g, const RefineOptions& opts = {});

}  // namespace edm
