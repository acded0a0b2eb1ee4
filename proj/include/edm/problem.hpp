#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edm/linalg.hpp"

namespace edm {

/// Weighted graph of squared distances plus embedding dimension. Vertices are
/// 0-based internally; files and messages use 1-based indices.
struct PartialEdm {
  int n = 0;
  int r = 2;
  EdgeVector d;
  std::optional<double> radio_range;
  std::optional<Points> ground_truth;

  /// Checks edge ordering, nonnegative distances and ground-truth shape.
  void validate() const;

  double density() const {
    return n < 2 ? 0.0 : static_cast<double>(d.size()) / (0.5 * n * (n - 1.0));
  }
  double norm_d() const;
  /// ||P K(P P^T) - d|| for a realization.
  double residual(const Points& p) const;
  /// ||P K(X) - d|| for a Gram matrix.
  double residual(const SymmetricMatrix& x) const;
  bool connected() const;
};

/// Sorted neighbor lists with edge values, for O(log deg) lookups.
class Adjacency {
 public:
  explicit Adjacency(const PartialEdm& g);

  int size() const { return static_cast<int>(nbrs_.size()); }
  const std::vector<int>& neighbors(int v) const { return nbrs_[v]; }
  bool adjacent(int u, int v) const;
  /// Measured squared distance, or nullopt if uv is not an edge.
  std::optional<double> value(int u, int v) const;
  /// Index into the edge list, or -1.
  int edge_index(int u, int v) const;

 private:
  std::vector<std::vector<int>> nbrs_;
  std::vector<std::vector<int>> edge_ids_;
  const std::vector<double>* values_;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

/// Solver telemetry shared by both algorithms and the refinement step.
struct SolveReport {
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  std::string algorithm;
  double residual = kNaN;          // ||P K(P P^T) - d|| of the returned points
  double witness_residual = kNaN;  // misfit of the convex (pre-rounding) iterate
  double trace = kNaN;             // trace of the convex iterate
  double solve_seconds = 0.0;
  double refine_seconds = 0.0;
  std::vector<StageTiming> timings;

  // Facial reduction.
  int num_cliques = 0;
  int union_fallbacks = 0;
  bool rank_deficient_system = false;
  bool projected_fallback = false;

  // Pareto search.
  double sigma = kNaN;
  double beta = kNaN;
  double tau = kNaN;
  double final_slope = kNaN;
  double newton_bound = kNaN;
  int newton_iterations = 0;
  int oracle_calls = 0;
  int fw_iterations = 0;
  bool certified = true;

  // Ground-truth evaluation, when available.
  std::optional<double> rmsd;
  std::optional<double> rmsd_pct_r;

  std::vector<std::string> diagnostics;
};

}  // namespace edm
