#pragma once

// Robust facial reduction: every clique exposes a face of the centered PSD
// cone; the weighted sum of exposing matrices is rounded to rank n - r and the
// distance least-squares problem is solved on the exposed r-dimensional face.

#include <vector>

#include "edm/cliques.hpp"
#include "edm/linalg.hpp"
#include "edm/problem.hpp"

namespace edm {

/// W_alpha = F F^T supported on `vertices`, F with orthonormal columns.
struct ExposingMatrix {
  std::vector<int> vertices;
  Matrix factor;  // |alpha| x m, columns orthogonal to e
};

struct ExposingAggregate {
  SymmetricMatrix w;
  SymmetricMatrix y;
  OrthonormalBasis u;  // n x r, centered
  Vector w_spectrum;   // eigenvalues of W on e-perp, ascending
};

/// Exposing matrix of face(X_alpha) where X_alpha is the nearest rank-r
/// centered PSD matrix to K^dagger(d_alpha). Throws CliqueTooSmall if
/// |alpha| < r + 1.
ExposingMatrix clique_exposing(const Clique& c, int r);

/// W = sum omega_alpha W_alpha; Y its nearest matrix of rank n - r in the
/// centered PSD cone; U spans the r smallest eigenvectors of W on e-perp.
/// Throws DeficientAggregate when lambda_{r+1}(W) < rel_tol * lambda_max(W).
ExposingAggregate aggregate_exposing(const std::vector<ExposingMatrix>& exposers,
                                     const std::vector<double>& weights, int n, int r,
                                     double rel_tol = 1e-6);

struct FaceSolution {
  Matrix z;             // r x r
  SymmetricMatrix x;    // U Z U^T
  double residual = 0.0;
  bool rank_deficient = false;
  bool projected = false;  // cone constraint was active
};

/// min ||P K(U Z U^T) - d|| over Z in S^r_+: unconstrained least squares,
/// then projected gradient when the minimizer is indefinite.
FaceSolution solve_face_least_squares(const OrthonormalBasis& u, const PartialEdm& g);

struct FacialReductionOptions {
  int k_bar = 0;  // 0 means 3 r
  bool clique_union = true;
  double noise_factor_estimate = 0.1;
  double deficiency_tol = 1e-6;
};

struct FacialReductionResult {
  Points points;
  SolveReport report;
};

FacialReductionResult facial_reduction_solve(const PartialEdm& g,
                                             const FacialReductionOptions& opts = {});

}  // namespace edm
