#pragma once

// Clique discovery, noise scores and weights, greedy clique ordering and the
// radio-range aware clique union used to grow cliques before facial reduction.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "edm/linalg.hpp"
#include "edm/problem.hpp"

namespace edm {

struct Clique {
  std::vector<int> vertices;  // sorted, 0-based
  SymmetricMatrix local;      // |alpha| x |alpha| hollow squared distances
  /// Local index pairs (a < b) whose distance was completed, not measured.
  std::vector<std::pair<int, int>> synthetic;
  /// Local realization from clique union; when present it, not `local`,
  /// determines the exposed face.
  std::optional<Points> realization;

  std::size_t size() const { return vertices.size(); }
};

struct CliqueSet {
  std::vector<Clique> cliques;
  std::vector<double> noise;    // nu per clique
  std::vector<double> weights;  // omega per clique

  std::size_t size() const { return cliques.size(); }
};

/// Builds the clique record for `vertices` from measured distances. Throws
/// ValidationError if some pair is not an edge.
Clique make_clique(const Adjacency& adj, std::vector<int> vertices);

/// Greedy clique collection: one neighborhood clique per vertex, uncovered
/// edges, then repeated extension by a common neighbor up to size k_bar.
CliqueSet find_cliques(const PartialEdm& g, int k_bar);

/// Scaled squared norm of the |alpha| - r smallest eigenvalues of
/// K^dagger(d_alpha). Throws CliqueTooSmall if |alpha| <= r.
double clique_noise(const Clique& c, int r);

/// Fills `noise` for every clique of size > r (others get 0).
void compute_clique_noise(CliqueSet& set, int r);

/// omega = 1 - nu / sum(nu); all ones when the noise sum vanishes.
void clique_weights(CliqueSet& set);

struct CliqueOrdering {
  /// Each sequence lists indices into the clique set; consecutive cliques
  /// share at least two vertices.
  std::vector<std::vector<std::size_t>> sequences;
  /// Vertices (0-based) that no sequence reaches.
  std::vector<int> uncovered;
};

CliqueOrdering order_cliques(const CliqueSet& set, int n);

struct UnionOptions {
  /// Synthetic distances must be at least (1 - nf) * R.
  double noise_factor_estimate = 0.1;
  /// Steepest-descent steps polishing each union realization (0 disables).
  int polish_iterations = 1000;
};

/// Local realization of alpha_a U alpha_b glued on their intersection. Throws
/// AmbiguousReflection when the radio range cannot pick a reflection.
Clique union_cliques(const Clique& a, const Clique& b, const PartialEdm& g,
                     const UnionOptions& opts = {});
Clique union_cliques(const Clique& a, const Clique& b, const PartialEdm& g,
                     const Adjacency& adj, const UnionOptions& opts = {});

struct UnionResult {
  CliqueSet merged;
  int fallbacks = 0;  // pairs left unmerged after AmbiguousReflection
};

/// Merges consecutive cliques of every sequence into beta_j = alpha_j U
/// alpha_{j+1}. Requires g.radio_range.
UnionResult clique_union_preprocess(const CliqueSet& set, const CliqueOrdering& order,
                                    const PartialEdm& g, const UnionOptions& opts = {});

}  // namespace edm
