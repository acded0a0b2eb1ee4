#include "edm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace edm {

void PartialEdm::validate() const {
  if (n < 1) throw Error(ErrorCode::ValidationError, "n must be positive");
  if (r < 1) throw Error(ErrorCode::ValidationError, "embedding dimension must be positive");
  d.validate(n);
  for (std::size_t k = 0; k < d.size(); ++k)
    if (!(d.values[k] >= 0.0))
      throw Error(ErrorCode::ValidationError,
                  "negative squared distance on edge " + std::to_string(d.edges[k].i + 1) +
                      "-" + std::to_string(d.edges[k].j + 1));
  if (radio_range && !(*radio_range > 0.0))
    throw Error(ErrorCode::ValidationError, "radio range must be positive");
  if (ground_truth) {
    if (ground_truth->rows() != n || ground_truth->cols() != r)
      throw Error(ErrorCode::ValidationError, "ground truth must be n x r");
  }
}

double PartialEdm::norm_d() const {
  double s = 0.0;
  for (double v : d.values) s += v * v;
  return std::sqrt(s);
}

double PartialEdm::residual(const Points& p) const {
  const std::vector<double> a = edge_distances(p, d.edges);
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - d.values[k]) * (a[k] - d.values[k]);
  return std::sqrt(s);
}

double PartialEdm::residual(const SymmetricMatrix& x) const {
  const std::vector<double> a = k_map_on_edges(x, d.edges);
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - d.values[k]) * (a[k] - d.values[k]);
  return std::sqrt(s);
}

bool PartialEdm::connected() const {
  if (n <= 1) return true;
  // Union-find over the edge list.
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  int components = n;
  for (const Edge& e : d.edges) {
    const int a = find(e.i), b = find(e.j);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

Adjacency::Adjacency(const PartialEdm& g)
    : nbrs_(g.n), edge_ids_(g.n), values_(&g.d.values) {
  for (std::size_t k = 0; k < g.d.size(); ++k) {
    const auto [i, j] = g.d.edges[k];
    nbrs_[i].push_back(j);
    edge_ids_[i].push_back(static_cast<int>(k));
    nbrs_[j].push_back(i);
    edge_ids_[j].push_back(static_cast<int>(k));
  }
  for (int v = 0; v < g.n; ++v) {
    std::vector<int> perm(nbrs_[v].size());
    for (std::size_t t = 0; t < perm.size(); ++t) perm[t] = static_cast<int>(t);
    std::sort(perm.begin(), perm.end(),
              [&](int a, int b) { return nbrs_[v][a] < nbrs_[v][b]; });
    std::vector<int> nb(perm.size()), ids(perm.size());
    for (std::size_t t = 0; t < perm.size(); ++t) {
      nb[t] = nbrs_[v][perm[t]];
      ids[t] = edge_ids_[v][perm[t]];
    }
    nbrs_[v] = std::move(nb);
    edge_ids_[v] = std::move(ids);
  }
}

int Adjacency::edge_index(int u, int v) const {
  const auto& nb = nbrs_[u];
  auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return -1;
  return edge_ids_[u][static_cast<std::size_t>(it - nb.begin())];
}

bool Adjacency::adjacent(int u, int v) const { return edge_index(u, v) >= 0; }

std::optional<double> Adjacency::value(int u, int v) const {
  const int k = edge_index(u, v);
  if (k < 0) return std::nullopt;
  return (*values_)[static_cast<std::size_t>(k)];
}

}  // namespace edm
