#pragma once

// Max-trace (and min-trace) EDM completion by root finding on the value
// function phi(tau) = min { ||P K(X) - d|| : X in tau D }, where
// D = { X psd, tr X = 1, X e = 0 }. Frank-Wolfe supplies affine minorants of
// v = phi - sigma; an inexact Newton iteration walks to the root.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edm/linalg.hpp"
#include "edm/problem.hpp"

namespace edm {

enum class TraceMode { Max, Min };

/// Linear minimization over tau D: S = tau v v^T with v the unit eigenvector
/// of the smallest eigenvalue of grad on e-perp; value = tau * lambda_min.
struct FwDirection {
  double tau = 0.0;
  Vector v;
  double lambda = 0.0;
  double value = 0.0;
  int matvecs = 0;
  bool dense_fallback = false;
};

FwDirection fw_direction(const SparseSymmetric& grad, double tau,
                         const LanczosOptions& lanczos = {});

/// argmin over [0, 1] of 0.5 || a_x + g (a_s - a_x) - d ||^2, with
/// a_x = P K(X) and a_s = P K(S) precomputed on the edges.
double exact_linesearch(std::span<const double> a_x, std::span<const double> a_s,
                        std::span<const double> d);
double exact_linesearch(const SymmetricMatrix& x, const SymmetricMatrix& s, const PartialEdm& g);

struct OracleTriple {
  double tau = 0.0;
  double l = 0.0;  // lower bound on v(tau)
  double u = 0.0;  // upper bound on v(tau)
  double s = 0.0;  // t' -> l + s (t' - tau) minorizes v
  SymmetricMatrix witness;
  double witness_misfit = 0.0;  // ||P K(witness) - d||
  int iterations = 0;
  bool ratio_terminated = false;  // stopped on the u <= alpha l test
  bool certified = true;          // false when the iteration cap was hit
};

struct FrankWolfeOptions {
  double alpha = 1.5;
  double beta = 0.1;
  int max_iterations = 50000;
  LanczosOptions lanczos{};
};

/// Affine minorant oracle for v(tau) = phi(tau) - sigma.
class FrankWolfeOracle {
 public:
  FrankWolfeOracle(const PartialEdm& g, double sigma, FrankWolfeOptions opts = {});

  /// `warm_start` must lie in tau D when given.
  OracleTriple query(double tau, const SymmetricMatrix* warm_start = nullptr);

  /// f(X) = 0.5 ||P K(X) - d||^2.
  double objective(const SymmetricMatrix& x) const;
  /// grad f = K* P* (P K(X) - d) in edge-plus-diagonal form.
  SparseSymmetric gradient(std::span<const double> residual) const;

  double sigma() const { return sigma_; }
  const FrankWolfeOptions& options() const { return opts_; }
  int total_iterations() const { return total_iterations_; }

 private:
  const PartialEdm& g_;
  double sigma_;
  FrankWolfeOptions opts_;
  Vector eig_start_;
  int total_iterations_ = 0;
};

/// Convenience wrapper constructing a one-shot oracle.
OracleTriple fw_oracle(const PartialEdm& g, double tau, double sigma, double alpha, double beta,
                       const SymmetricMatrix* warm_start = nullptr);

struct MinorantBounds {
  double l = 0.0;
  double u = 0.0;
  double s = 0.0;
};

using AffineMinorantOracle = std::function<MinorantBounds(double t)>;

struct RootResult {
  double t = 0.0;
  std::vector<double> iterates;  // t_0, t_1, ...
  std::vector<MinorantBounds> bounds;
  int iterations = 0;            // Newton steps taken
  bool converged = false;        // terminated with u <= beta
  std::string diagnostic;
};

/// Inexact Newton: t_{k+1} = t_k - l_k / s_k until u_k <= beta. Throws
/// NonConvergence after `max_iterations` steps.
RootResult newton_root(const AffineMinorantOracle& oracle, double t0, double beta,
                       int max_iterations = 200);

/// max{ log_{2/alpha}(|s0| R / beta) + log_{2/alpha}(2) log_{2/alpha}(2 l0 / beta), 1 }.
double newton_iteration_bound(double alpha, double beta, double s0, double l0, double radius);

struct ParetoOptions {
  TraceMode mode = TraceMode::Max;
  double alpha = 1.5;
  double beta = 0.1;
  std::optional<double> t0;
  FrankWolfeOptions fw{};
  int max_doublings = 60;
};

struct ParetoResult {
  Points points;
  SymmetricMatrix witness;
  SolveReport report;
  RootResult root;
  std::vector<OracleTriple> triples;  // every oracle answer (witnesses dropped)
};

/// Default max-trace starting point n r max(d), before doubling.
double default_max_trace_start(const PartialEdm& g);

ParetoResult pareto_solve(const PartialEdm& g, double sigma, const ParetoOptions& opts = {});

}  // namespace edm
