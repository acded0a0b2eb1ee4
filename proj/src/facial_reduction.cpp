#include "edm/facial_reduction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "edm/parallel.hpp"

namespace edm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int svec_size(int r) { return r * (r + 1) / 2; }

Vector svec(const Matrix& z) {
  const auto r = static_cast<int>(z.rows());
  Vector v(svec_size(r));
  int k = 0;
  for (int a = 0; a < r; ++a) {
    v[k++] = z(a, a);
    for (int b = a + 1; b < r; ++b) v[k++] = std::sqrt(2.0) * z(a, b);
  }
  return v;
}

Matrix smat(const Vector& v, int r) {
  Matrix z(r, r);
  int k = 0;
  for (int a = 0; a < r; ++a) {
    z(a, a) = v[k++];
    for (int b = a + 1; b < r; ++b) z(a, b) = z(b, a) = v[k++] / std::sqrt(2.0);
  }
  return z;
}

Matrix project_psd(const Matrix& z) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(z);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

ExposingMatrix clique_exposing(const Clique& c, int r) {
  const auto k = static_cast<int>(c.size());
  if (k < r + 1)
    throw Error(ErrorCode::CliqueTooSmall,
                "clique of size " + std::to_string(k) + " cannot expose a face for r=" +
                    std::to_string(r));
  const CenteredEigen eig =
      centered_eigen(c.realization ? gram(*c.realization) : k_pinv(c.local));
  // Kept directions: the r largest eigenvalues that are positive. Everything
  // else in e-perp spans the exposing factor.
  const int m = k - 1;
  int kept = 0;
  for (int t = m - 1; t >= std::max(0, m - r); --t)
    if (eig.values[t] > kEigenvalueFloor * std::max(1.0, std::abs(eig.values[m - 1]))) ++kept;
    else break;
  ExposingMatrix out;
  out.vertices = c.vertices;
  out.factor = eig.vectors.leftCols(m - kept);
  return out;
}

ExposingAggregate aggregate_exposing(const std::vector<ExposingMatrix>& exposers,
                                     const std::vector<double>& weights, int n, int r,
                                     double rel_tol) {
  if (weights.size() != exposers.size())
    throw Error(ErrorCode::DimensionMismatch, "one weight per exposing matrix required");
  if (r < 1 || r > n - 1) throw Error(ErrorCode::RankOutOfRange, "need 1 <= r <= n-1");
  Matrix w = Matrix::Zero(n, n);
  for (std::size_t t = 0; t < exposers.size(); ++t) {
    const ExposingMatrix& ex = exposers[t];
    if (ex.factor.cols() == 0 || weights[t] == 0.0) continue;
    const Matrix block = weights[t] * ex.factor * ex.factor.transpose();
    for (std::size_t a = 0; a < ex.vertices.size(); ++a) {
      if (ex.vertices[a] < 0 || ex.vertices[a] >= n)
        throw Error(ErrorCode::DimensionMismatch, "exposing support outside [0, n)");
      for (std::size_t b = 0; b < ex.vertices.size(); ++b)
        w(ex.vertices[a], ex.vertices[b]) += block(static_cast<Index>(a), static_cast<Index>(b));
    }
  }
  ExposingAggregate out;
  out.w = SymmetricMatrix(w);
  const CenteredEigen eig = centered_eigen(out.w);
  out.w_spectrum = eig.values;
  const double lam_max = eig.values.size() > 0 ? eig.values[eig.values.size() - 1] : 0.0;
  const double lam_next = eig.values[r];
  if (!(lam_max > 0.0) || lam_next < rel_tol * lam_max) {
    std::ostringstream msg;
    msg << "aggregate exposing matrix has rank below n-r (lambda_" << r + 1 << "="
        << lam_next << ", lambda_max=" << lam_max << ")";
    std::vector<int> uncovered;
    for (int v = 0; v < n; ++v)
      if (w(v, v) <= 0.0) uncovered.push_back(v + 1);
    if (!uncovered.empty()) {
      msg << "; uncovered vertices:";
      for (int v : uncovered) msg << ' ' << v;
    }
    throw Error(ErrorCode::DeficientAggregate, msg.str());
  }
  out.y = project_centered_psd_rank(eig, n - r);
  out.u = OrthonormalBasis(eig.vectors.leftCols(r), true);
  return out;
}

FaceSolution solve_face_least_squares(const OrthonormalBasis& u, const PartialEdm& g) {
  const int r = static_cast<int>(u.cols());
  if (r < 1) throw Error(ErrorCode::RankOutOfRange, "face dimension must be positive");
  if (u.ambient_dim() != g.n) throw Error(ErrorCode::DimensionMismatch, "basis/graph size mismatch");
  const Matrix& um = u.matrix();
  const int m = svec_size(r);
  const auto ne = static_cast<Index>(g.d.size());
  Matrix a(ne, m);
  Vector d(ne);
  for (Index k = 0; k < ne; ++k) {
    const Edge& e = g.d.edges[static_cast<std::size_t>(k)];
    const Eigen::RowVectorXd w = um.row(e.i) - um.row(e.j);
    int c = 0;
    for (int p = 0; p < r; ++p) {
      a(k, c++) = w[p] * w[p];
      for (int q = p + 1; q < r; ++q) a(k, c++) = std::sqrt(2.0) * w[p] * w[q];
    }
    d[k] = g.d.values[static_cast<std::size_t>(k)];
  }

  FaceSolution out;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  out.rank_deficient = cod.rank() < m;
  Vector z = cod.solve(d);
  Matrix zm = smat(z, r);
  Eigen::SelfAdjointEigenSolver<Matrix> es(zm, Eigen::EigenvaluesOnly);
  const double znorm = zm.norm();
  if (es.eigenvalues()[0] < -1e-9 * znorm) {
    // Projected gradient on 0.5 ||A z - d||^2 over the PSD cone.
    out.projected = true;
    const Matrix gram_a = a.transpose() * a;
    const Vector atd = a.transpose() * d;
    Eigen::SelfAdjointEigenSolver<Matrix> eg(gram_a, Eigen::EigenvaluesOnly);
    const double lip = std::max(eg.eigenvalues()[m - 1], 1e-300);
    z = svec(project_psd(zm));
    double prev = (a * z - d).norm();
    for (int it = 0; it < 200000; ++it) {
      const Vector grad = gram_a * z - atd;
      z = svec(project_psd(smat(z - grad / lip, r)));
      const double res = (a * z - d).norm();
      if (std::abs(prev - res) <= 1e-10 * std::max(prev, 1e-300)) {
        prev = res;
        break;
      }
      prev = res;
    }
    zm = smat(z, r);
  }
  out.z = zm;
  out.residual = (a * z - d).norm();
  out.x = SymmetricMatrix(Matrix(um * zm * um.transpose()));
  return out;
}

FacialReductionResult facial_reduction_solve(const PartialEdm& g,
                                             const FacialReductionOptions& opts) {
  g.validate();
  const int r = g.r;
  if (r < 1) throw Error(ErrorCode::InvalidArgument, "r must be at least 1");
  const auto t_start = Clock::now();
  FacialReductionResult result;
  SolveReport& rep = result.report;
  rep.algorithm = "fr";

  auto t0 = Clock::now();
  CliqueSet found = find_cliques(g, opts.k_bar > 0 ? opts.k_bar : 3 * r);
  CliqueSet base;
  for (auto& c : found.cliques)
    if (static_cast<int>(c.size()) > r) base.cliques.push_back(std::move(c));
  rep.timings.push_back({"cliques", seconds_since(t0)});

  auto build = [&](CliqueSet set) {
    auto ts = Clock::now();
    compute_clique_noise(set, r);
    clique_weights(set);
    std::vector<ExposingMatrix> exposers(set.size());
    parallel_for(set.size(), [&](std::size_t i) { exposers[i] = clique_exposing(set.cliques[i], r); });
    rep.timings.push_back({"exposing", seconds_since(ts)});
    ts = Clock::now();
    ExposingAggregate agg = aggregate_exposing(exposers, set.weights, g.n, r, opts.deficiency_tol);
    rep.timings.push_back({"aggregate", seconds_since(ts)});
    rep.num_cliques = static_cast<int>(set.size());
    return agg;
  };

  std::optional<ExposingAggregate> agg;
  if (opts.clique_union && g.radio_range) {
    t0 = Clock::now();
    const CliqueOrdering order = order_cliques(base, g.n);
    UnionResult merged = clique_union_preprocess(base, order, g, {opts.noise_factor_estimate});
    rep.union_fallbacks = merged.fallbacks;
    rep.timings.push_back({"clique_union", seconds_since(t0)});
    try {
      agg = build(std::move(merged.merged));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DeficientAggregate) throw;
      rep.diagnostics.push_back(std::string("clique union aggregate deficient, using plain cliques: ") + e.what());
    }
  }
  if (!agg) agg = build(base);

  t0 = Clock::now();
  FaceSolution face = solve_face_least_squares(agg->u, g);
  rep.timings.push_back({"least_squares", seconds_since(t0)});
  rep.rank_deficient_system = face.rank_deficient;
  rep.projected_fallback = face.projected;
  if (face.rank_deficient) rep.diagnostics.push_back("RankDeficientSystem: minimum-norm solution used");

  Eigen::SelfAdjointEigenSolver<Matrix> es(face.z);
  const Matrix root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  result.points = agg->u.matrix() * root;
  rep.trace = face.x.trace();
  rep.witness_residual = face.residual;
  rep.residual = g.residual(result.points);
  rep.solve_seconds = seconds_since(t_start);
  return result;
}

}  // namespace edm
