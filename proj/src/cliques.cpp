#include "edm/cliques.hpp"

#include "edm/refine.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "edm/parallel.hpp"

namespace edm {

Clique make_clique(const Adjacency& adj, std::vector<int> vertices) {
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  const auto k = static_cast<Index>(vertices.size());
  Matrix local = Matrix::Zero(k, k);
  for (Index a = 0; a < k; ++a) {
    for (Index b = a + 1; b < k; ++b) {
      const auto v = adj.value(vertices[a], vertices[b]);
      if (!v)
        throw Error(ErrorCode::ValidationError,
                    "vertices " + std::to_string(vertices[a] + 1) + " and " +
                        std::to_string(vertices[b] + 1) + " are not adjacent");
      local(a, b) = *v;
    }
  }
  return Clique{std::move(vertices), SymmetricMatrix(local), {}, std::nullopt};
}

namespace {

// Clique inside the closed neighborhood of v: repeatedly drop the member with
// the most non-neighbors inside the candidate set (lowest index on ties).
std::vector<int> neighborhood_clique(const Adjacency& adj, int v) {
  std::vector<int> cand = adj.neighbors(v);
  cand.insert(std::lower_bound(cand.begin(), cand.end(), v), v);
  const std::size_t k = cand.size();
  std::vector<char> alive(k, 1);
  std::vector<int> zeros(k, 0);
  std::vector<std::vector<char>> adjm(k, std::vector<char>(k, 0));
  for (std::size_t a = 0; a < k; ++a) {
    adjm[a][a] = 1;
    for (std::size_t b = a + 1; b < k; ++b) {
      const char e = adj.adjacent(cand[a], cand[b]) ? 1 : 0;
      adjm[a][b] = adjm[b][a] = e;
    }
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) zeros[a] += adjm[a][b] ? 0 : 1;
  for (;;) {
    std::size_t worst = k;
    int most = 0;
    for (std::size_t a = 0; a < k; ++a) {
      if (alive[a] && zeros[a] > most) {
        most = zeros[a];
        worst = a;
      }
    }
    if (worst == k) break;
    alive[worst] = 0;
    for (std::size_t b = 0; b < k; ++b)
      if (alive[b] && !adjm[worst][b]) --zeros[b];
  }
  std::vector<int> out;
  for (std::size_t a = 0; a < k; ++a)
    if (alive[a]) out.push_back(cand[a]);
  return out;
}

}  // namespace

CliqueSet find_cliques(const PartialEdm& g, int k_bar) {
  if (k_bar < 2) throw Error(ErrorCode::InvalidArgument, "k_bar must be at least 2");
  const Adjacency adj(g);
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> found;
  auto add = [&](std::vector<int> c) {
    if (c.size() < 2) return;
    if (seen.insert(c).second) found.push_back(std::move(c));
  };

  // Theta_1: one clique per vertex.
  std::vector<char> edge_covered(g.d.size(), 0);
  for (int v = 0; v < g.n; ++v) {
    std::vector<int> c = neighborhood_clique(adj, v);
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b)
        edge_covered[static_cast<std::size_t>(adj.edge_index(c[a], c[b]))] = 1;
    add(std::move(c));
  }

  // Theta_2: edges not covered by any Theta_1 clique.
  std::vector<std::vector<int>> level;
  for (std::size_t k = 0; k < g.d.size(); ++k) {
    if (edge_covered[k]) continue;
    std::vector<int> c{g.d.edges[k].i, g.d.edges[k].j};
    level.push_back(c);
    add(std::move(c));
  }

  // Theta_3 .. Theta_kbar: extend by the lowest-index common neighbor.
  for (int k = 3; k <= k_bar; ++k) {
    std::vector<std::vector<int>> next;
    for (const auto& alpha : level) {
      std::vector<int> common = adj.neighbors(alpha.front());
      for (std::size_t t = 1; t < alpha.size() && !common.empty(); ++t) {
        std::vector<int> tmp;
        const auto& nb = adj.neighbors(alpha[t]);
        std::set_intersection(common.begin(), common.end(), nb.begin(), nb.end(),
                              std::back_inserter(tmp));
        common.swap(tmp);
      }
      if (common.empty()) continue;
      std::vector<int> grown = alpha;
      grown.insert(std::lower_bound(grown.begin(), grown.end(), common.front()),
                   common.front());
      next.push_back(grown);
      add(std::move(grown));
    }
    level.swap(next);
  }

  CliqueSet out;
  out.cliques.reserve(found.size());
  for (auto& c : found) out.cliques.push_back(make_clique(adj, std::move(c)));
  out.noise.assign(out.cliques.size(), 0.0);
  out.weights.assign(out.cliques.size(), 1.0);
  return out;
}

double clique_noise(const Clique& c, int r) {
  const auto k = static_cast<int>(c.size());
  if (k <= r)
    throw Error(ErrorCode::CliqueTooSmall,
                "clique of size " + std::to_string(k) + " for r=" + std::to_string(r));
  Eigen::SelfAdjointEigenSolver<Matrix> es(k_pinv(c.local).dense(), Eigen::EigenvaluesOnly);
  const Vector& lam = es.eigenvalues();  // ascending
  double s = 0.0;
  for (int j = 0; j < k - r; ++j) s += lam[j] * lam[j];
  return s / (0.5 * k * (k - 1));
}

void compute_clique_noise(CliqueSet& set, int r) {
  set.noise.assign(set.size(), 0.0);
  parallel_for(set.size(), [&](std::size_t i) {
    if (static_cast<int>(set.cliques[i].size()) > r) set.noise[i] = clique_noise(set.cliques[i], r);
  });
}

void clique_weights(CliqueSet& set) {
  const double total = std::accumulate(set.noise.begin(), set.noise.end(), 0.0);
  set.weights.assign(set.size(), 1.0);
  if (!(total > 0.0) || set.size() == 1) return;
  for (std::size_t i = 0; i < set.size(); ++i)
    set.weights[i] = std::clamp(1.0 - set.noise[i] / total, 0.0, 1.0);
}

CliqueOrdering order_cliques(const CliqueSet& set, int n) {
  CliqueOrdering out;
  const std::size_t m = set.size();
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  std::vector<char> in_pool(m, 1);

  auto intersection_size = [&](std::size_t a, std::size_t b) {
    const auto& va = set.cliques[a].vertices;
    const auto& vb = set.cliques[b].vertices;
    std::size_t s = 0;
    for (std::size_t p = 0, q = 0; p < va.size() && q < vb.size();) {
      if (va[p] == vb[q]) {
        ++s, ++p, ++q;
      } else if (va[p] < vb[q]) {
        ++p;
      } else {
        ++q;
      }
    }
    return s;
  };
  auto take = [&](std::size_t c) {
    in_pool[c] = 0;
    for (int v : set.cliques[c].vertices) covered[static_cast<std::size_t>(v)] = 1;
    for (std::size_t t = 0; t < m; ++t) {
      if (!in_pool[t]) continue;
      const auto& vt = set.cliques[t].vertices;
      if (std::all_of(vt.begin(), vt.end(), [&](int v) { return covered[static_cast<std::size_t>(v)]; }))
        in_pool[t] = 0;
    }
  };

  for (;;) {
    std::size_t start = m;
    for (std::size_t t = 0; t < m; ++t)
      if (in_pool[t] && (start == m || set.cliques[t].size() > set.cliques[start].size())) start = t;
    if (start == m) break;
    std::vector<std::size_t> seq{start};
    take(start);
    for (;;) {
      const std::size_t prev = seq.back();
      std::size_t best = m;
      std::size_t best_gain = 0;
      for (std::size_t t = 0; t < m; ++t) {
        if (!in_pool[t]) continue;
        const std::size_t inter = intersection_size(prev, t);
        if (inter < 2) continue;
        const std::size_t gain = set.cliques[t].size() - inter;
        if (best == m || gain > best_gain) {
          best = t;
          best_gain = gain;
        }
      }
      if (best == m) break;
      seq.push_back(best);
      take(best);
    }
    out.sequences.push_back(std::move(seq));
  }
  for (int v = 0; v < n; ++v)
    if (!covered[static_cast<std::size_t>(v)]) out.uncovered.push_back(v);
  return out;
}

namespace {

// A reflection is preferred only if its score is at most this fraction of the
// other one's.
constexpr double kSeparation = 0.25;
// Candidates closer than this (relative to the radio range) are congruent.
constexpr double kCongruenceTol = 1e-3;

// Points realizing a clique's local distances in R^r.
Points local_realization(const Clique& c, int r) {
  const SymmetricMatrix x = project_centered_psd_rank(k_pinv(c.local), std::min<int>(r, static_cast<int>(c.size()) - 1));
  Points p = factor_gram(x, std::min<int>(r, static_cast<int>(c.size()) - 1));
  if (p.cols() < r) {
    Points padded = Points::Zero(p.rows(), r);
    padded.leftCols(p.cols()) = p;
    p = padded;
  }
  return p;
}

}  // namespace

Clique union_cliques(const Clique& a, const Clique& b, const PartialEdm& g,
                     const UnionOptions& opts) {
  return union_cliques(a, b, g, Adjacency(g), opts);
}

Clique union_cliques(const Clique& a, const Clique& b, const PartialEdm& g,
                     const Adjacency& adj, const UnionOptions& opts) {
  if (!g.radio_range)
    throw Error(ErrorCode::InvalidArgument, "clique union requires a radio range");
  const int r = g.r;
  const double radio = *g.radio_range;

  // Shared vertices as local index pairs.
  std::vector<std::pair<int, int>> shared;
  for (std::size_t p = 0, q = 0; p < a.size() && q < b.size();) {
    if (a.vertices[p] == b.vertices[q]) {
      shared.emplace_back(static_cast<int>(p), static_cast<int>(q));
      ++p, ++q;
    } else if (a.vertices[p] < b.vertices[q]) {
      ++p;
    } else {
      ++q;
    }
  }
  if (shared.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "cliques must share at least two vertices");

  const Points pa = local_realization(a, r);
  const Points pb = local_realization(b, r);
  const auto ns = static_cast<Index>(shared.size());
  Points sa(ns, r), sb(ns, r);
  for (Index t = 0; t < ns; ++t) {
    sa.row(t) = pa.row(shared[static_cast<std::size_t>(t)].first);
    sb.row(t) = pb.row(shared[static_cast<std::size_t>(t)].second);
  }
  const Eigen::RowVectorXd ca = sa.colwise().mean();
  const Eigen::RowVectorXd cb = sb.colwise().mean();
  sa.rowwise() -= ca;
  sb.rowwise() -= cb;

  Eigen::JacobiSVD<Matrix> svd(sb.transpose() * sa, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  const double det = (u * v.transpose()).determinant();
  Matrix flip = Matrix::Identity(r, r);
  // Candidate 0: proper rotation; candidate 1: its mirror image across the
  // hyperplane spanned by the dominant intersection directions.
  std::array<Matrix, 2> rot;
  flip(r - 1, r - 1) = det > 0 ? 1.0 : -1.0;
  rot[0] = u * flip * v.transpose();
  flip(r - 1, r - 1) = -flip(r - 1, r - 1);
  rot[1] = u * flip * v.transpose();

  std::vector<int> verts = a.vertices;
  verts.insert(verts.end(), b.vertices.begin(), b.vertices.end());
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  const auto k = static_cast<Index>(verts.size());

  // Measured distances inside the union, including the cross pairs the
  // intersection alignment ignores.
  PartialEdm sub;
  sub.n = static_cast<int>(k);
  sub.r = r;
  std::vector<std::pair<Index, Index>> unmeasured;
  for (Index p = 0; p < k; ++p)
    for (Index q = p + 1; q < k; ++q) {
      if (const auto meas = adj.value(verts[static_cast<std::size_t>(p)], verts[static_cast<std::size_t>(q)])) {
        sub.d.edges.push_back({static_cast<int>(p), static_cast<int>(q)});
        sub.d.values.push_back(*meas);
      } else {
        unmeasured.emplace_back(p, q);
      }
    }

  // Each reflection: a's points, b's remaining points mapped into a's frame,
  // then a local polish against all measured distances.
  const double min_dist = (1.0 - opts.noise_factor_estimate) * radio;
  std::array<Points, 2> cand;
  std::array<double, 2> violation{}, stress{};
  for (int c = 0; c < 2; ++c) {
    Points mapped = (pb.rowwise() - cb) * rot[c];
    mapped.rowwise() += ca;
    Points pu(k, r);
    for (Index t = 0; t < k; ++t) {
      const int vtx = verts[static_cast<std::size_t>(t)];
      auto ita = std::lower_bound(a.vertices.begin(), a.vertices.end(), vtx);
      if (ita != a.vertices.end() && *ita == vtx) {
        pu.row(t) = pa.row(ita - a.vertices.begin());
      } else {
        auto itb = std::lower_bound(b.vertices.begin(), b.vertices.end(), vtx);
        pu.row(t) = mapped.row(itb - b.vertices.begin());
      }
    }
    if (opts.polish_iterations > 0) {
      RefineOptions ro;
      ro.max_iters = opts.polish_iterations;
      pu = steepest_descent(pu, sub, ro).points;
    }
    double viol = 0.0;
    for (const auto& [p, q] : unmeasured) viol += std::max(0.0, min_dist - (pu.row(p) - pu.row(q)).norm());
    violation[c] = viol;
    stress[c] = refine_objective(pu, sub);
    cand[c] = center_rows(pu);
  }

  // Least radio-range violation wins when clearly separated, then least
  // stress; congruent candidates are the same local realization.
  const double vmin = std::min(violation[0], violation[1]);
  const double vmax = std::max(violation[0], violation[1]);
  const double smin = std::min(stress[0], stress[1]);
  const double smax = std::max(stress[0], stress[1]);
  int choice;
  if (vmax > 1e-9 * radio && vmin <= kSeparation * vmax) {
    choice = violation[0] <= violation[1] ? 0 : 1;
  } else if (smax > 1e-18 && smin <= kSeparation * smax) {
    choice = stress[0] <= stress[1] ? 0 : 1;
  } else if (procrustes_rmsd(cand[0], cand[1]).rmsd <= kCongruenceTol * radio) {
    choice = 0;
  } else {
    throw Error(ErrorCode::AmbiguousReflection,
                "radio range cannot separate reflections (violations " + std::to_string(violation[0]) +
                    ", " + std::to_string(violation[1]) + ")");
  }
  const Points& pu = cand[static_cast<std::size_t>(choice)];

  Clique out;
  out.vertices = std::move(verts);
  Matrix local = Matrix::Zero(k, k);
  for (Index p = 0; p < k; ++p) {
    for (Index q = p + 1; q < k; ++q) {
      const auto meas = adj.value(out.vertices[static_cast<std::size_t>(p)],
                                  out.vertices[static_cast<std::size_t>(q)]);
      if (meas) {
        local(p, q) = *meas;
      } else {
        local(p, q) = (pu.row(p) - pu.row(q)).squaredNorm();
        out.synthetic.emplace_back(static_cast<int>(p), static_cast<int>(q));
      }
    }
  }
  out.local = SymmetricMatrix(local);
  out.realization = center_rows(pu);
  return out;
}

UnionResult clique_union_preprocess(const CliqueSet& set, const CliqueOrdering& order,
                                    const PartialEdm& g, const UnionOptions& opts) {
  if (!g.radio_range)
    throw Error(ErrorCode::InvalidArgument, "clique union requires a radio range");
  struct Job {
    std::size_t a, b;
  };
  std::vector<Job> jobs;
  std::vector<std::size_t> singles;
  for (const auto& seq : order.sequences) {
    if (seq.size() == 1) singles.push_back(seq.front());
    for (std::size_t j = 0; j + 1 < seq.size(); ++j) jobs.push_back({seq[j], seq[j + 1]});
  }
  const Adjacency adj(g);
  std::vector<std::optional<Clique>> merged(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t t) {
    try {
      merged[t] = union_cliques(set.cliques[jobs[t].a], set.cliques[jobs[t].b], g, adj, opts);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AmbiguousReflection) throw;
    }
  });

  UnionResult out;
  std::set<std::vector<int>> seen;
  auto emit = [&](const Clique& c) {
    if (seen.insert(c.vertices).second) out.merged.cliques.push_back(c);
  };
  for (std::size_t t = 0; t < jobs.size(); ++t) {
    if (merged[t]) {
      emit(*merged[t]);
    } else {
      ++out.fallbacks;
      emit(set.cliques[jobs[t].a]);
      emit(set.cliques[jobs[t].b]);
    }
  }
  for (std::size_t s : singles) emit(set.cliques[s]);
  out.merged.noise.assign(out.merged.size(), 0.0);
  out.merged.weights.assign(out.merged.size(), 1.0);
  return out;
}

}  // namespace edm
