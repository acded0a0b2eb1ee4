#include "edm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace edm {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonHollowInput: return "NonHollowInput";
    case ErrorCode::RankOutOfRange: return "RankOutOfRange";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CliqueTooSmall: return "CliqueTooSmall";
    case ErrorCode::AmbiguousReflection: return "AmbiguousReflection";
    case ErrorCode::DeficientAggregate: return "DeficientAggregate";
    case ErrorCode::IterationCapExceeded: return "IterationCapExceeded";
    case ErrorCode::BadInitialPoint: return "BadInitialPoint";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NoGroundTruth: return "NoGroundTruth";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

SymmetricMatrix::SymmetricMatrix(const Matrix& m) : m_(m) {
  if (m.rows() != m.cols())
    throw Error(ErrorCode::DimensionMismatch, "symmetric matrix must be square");
  m_.triangularView<Eigen::StrictlyLower>() = m_.transpose();
}

void EdgeVector::validate(int n) const {
  if (values.size() != edges.size())
    throw Error(ErrorCode::ValidationError, "edge/value count mismatch");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    if (e.i < 0 || e.j >= n || e.i >= e.j)
      throw Error(ErrorCode::ValidationError,
                  "edge (" + std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) +
                      ") out of range for n=" + std::to_string(n));
    if (k > 0 && !(edges[k - 1] < e))
      throw Error(ErrorCode::ValidationError, "edges not strictly sorted");
  }
}

void SparseSymmetric::apply(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) const {
  y = diag.cwiseProduct(x);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [i, j] = edges[k];
    const double w = offdiag[k];
    y[i] += w * x[j];
    y[j] += w * x[i];
  }
}

double SparseSymmetric::quadratic_form(const Eigen::Ref<const Vector>& x) const {
  double s = (diag.array() * x.array().square()).sum();
  for (std::size_t k = 0; k < edges.size(); ++k)
    s += 2.0 * offdiag[k] * x[edges[k].i] * x[edges[k].j];
  return s;
}

SymmetricMatrix SparseSymmetric::to_dense() const {
  Matrix m = diag.asDiagonal();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    m(edges[k].i, edges[k].j) = offdiag[k];
    m(edges[k].j, edges[k].i) = offdiag[k];
  }
  return SymmetricMatrix(m);
}

OrthonormalBasis::OrthonormalBasis(Matrix columns, bool centered)
    : u_(std::move(columns)), centered_(centered) {
  const Index k = u_.cols();
  if (k > u_.rows())
    throw Error(ErrorCode::DimensionMismatch, "more columns than ambient dimension");
  if ((u_.transpose() * u_ - Matrix::Identity(k, k)).norm() > 1e-10)
    throw Error(ErrorCode::ValidationError, "columns are not orthonormal");
  if (centered && k > 0 && u_.colwise().sum().norm() > 1e-10)
    throw Error(ErrorCode::ValidationError, "basis is not centered");
}

SymmetricMatrix k_map(const SymmetricMatrix& x) {
  const Matrix& m = x.dense();
  const Vector diag = m.diagonal();
  const Index n = m.rows();
  Matrix out = diag.replicate(1, n) + diag.transpose().replicate(n, 1) - 2.0 * m;
  out.diagonal().setZero();
  return SymmetricMatrix(out);
}

SymmetricMatrix k_adjoint(const SymmetricMatrix& d) {
  const Matrix& m = d.dense();
  Matrix out = -2.0 * m;
  out.diagonal() += 2.0 * m.rowwise().sum();
  return SymmetricMatrix(out);
}

SymmetricMatrix k_pinv(const SymmetricMatrix& d) {
  const Matrix& m = d.dense();
  const Index n = m.rows();
  if (n == 0) return d;
  const double scale = m.cwiseAbs().maxCoeff();
  if (m.diagonal().cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorCode::NonHollowInput, "K^dagger requires a zero diagonal");
  // -1/2 J D J without forming J.
  const Vector row_mean = m.rowwise().mean();
  const double total_mean = row_mean.mean();
  Matrix out = m;
  out.colwise() -= row_mean;
  out.rowwise() -= row_mean.transpose();
  out.array() += total_mean;
  out *= -0.5;
  return SymmetricMatrix(out);
}

SparseSymmetric k_adjoint_sparse(int n, const std::vector<Edge>& edges,
                                 const std::vector<double>& values) {
  SparseSymmetric s;
  s.n = n;
  s.edges = edges;
  s.offdiag.resize(edges.size());
  s.diag = Vector::Zero(n);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    s.offdiag[k] = -2.0 * values[k];
    s.diag[edges[k].i] += 2.0 * values[k];
    s.diag[edges[k].j] += 2.0 * values[k];
  }
  return s;
}

std::vector<double> k_map_on_edges(const SymmetricMatrix& x, const std::vector<Edge>& edges) {
  std::vector<double> out(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [i, j] = edges[k];
    out[k] = x(i, i) + x(j, j) - 2.0 * x(i, j);
  }
  return out;
}

std::vector<double> edge_distances(const Points& p, const std::vector<Edge>& edges) {
  std::vector<double> out(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k)
    out[k] = (p.row(edges[k].i) - p.row(edges[k].j)).squaredNorm();
  return out;
}

Matrix centered_complement_basis(Index n) {
  if (n <= 1) return Matrix(n, 0);
  Vector w = Vector::Constant(n, -1.0 / std::sqrt(static_cast<double>(n)));
  w[0] += 1.0;
  const double ww = w.squaredNorm();
  // H = I - 2 w w^T / (w^T w); drop its first column e / sqrt(n).
  Matrix v = -2.0 / ww * w * w.tail(n - 1).transpose();
  v.bottomRows(n - 1).diagonal().array() += 1.0;
  return v;
}

CenteredEigen centered_eigen(const SymmetricMatrix& x) {
  const Index n = x.order();
  const Matrix v = centered_complement_basis(n);
  CenteredEigen out;
  if (n <= 1) {
    out.values = Vector(0);
    out.vectors = Matrix(n, 0);
    return out;
  }
  const Matrix z = v.transpose() * x.dense() * v;
  Eigen::SelfAdjointEigenSolver<Matrix> es(z);
  out.values = es.eigenvalues();
  out.vectors = v * es.eigenvectors();
  return out;
}

SymmetricMatrix project_centered_psd_rank(const CenteredEigen& eig, int r) {
  const Index n = eig.vectors.rows();
  const Index m = eig.values.size();
  if (r < 0 || r > m)
    throw Error(ErrorCode::RankOutOfRange,
                "rank " + std::to_string(r) + " outside [0, " + std::to_string(m) + "]");
  Matrix out = Matrix::Zero(n, n);
  // Keep the r largest eigenvalues, positive parts only.
  for (Index k = m - r; k < m; ++k) {
    const double lam = eig.values[k];
    if (lam <= 0.0) continue;
    out.noalias() += lam * eig.vectors.col(k) * eig.vectors.col(k).transpose();
  }
  return SymmetricMatrix(out);
}

SymmetricMatrix project_centered_psd_rank(const SymmetricMatrix& x, int r) {
  if (r < 0 || r > x.order() - 1)
    throw Error(ErrorCode::RankOutOfRange,
                "rank " + std::to_string(r) + " outside [0, " +
                    std::to_string(x.order() - 1) + "]");
  return project_centered_psd_rank(centered_eigen(x), r);
}

int numerical_rank(const Vector& eigenvalues, double relative_tol) {
  if (eigenvalues.size() == 0) return 0;
  const double scale = eigenvalues.cwiseAbs().maxCoeff();
  const double cut = std::max(kEigenvalueFloor, relative_tol * scale);
  return static_cast<int>((eigenvalues.array() > cut).count());
}

namespace {

// Orthogonalize v against e and the first k columns of q (two passes).
void orthogonalize(Eigen::Ref<Vector> v, const Matrix& q, Index k) {
  for (int pass = 0; pass < 2; ++pass) {
    v.array() -= v.mean();
    if (k > 0) v -= q.leftCols(k) * (q.leftCols(k).transpose() * v);
  }
}

}  // namespace

EigPair lanczos_extreme_on_complement(const LinearOperator& op, int n, Extreme which,
                                      const LanczosOptions& opts) {
  if (n < 2) throw Error(ErrorCode::DimensionMismatch, "e-perp is trivial for n < 2");
  const int max_matvecs = opts.max_matvecs > 0 ? opts.max_matvecs : 10 * n;
  const Index m = std::clamp<Index>(opts.basis_size, 2, n - 1);
  const Index keep = std::max<Index>(1, m / 3);

  Matrix q(n, m);   // orthonormal basis, orthogonal to e
  Matrix aq(n, m);  // A applied to the basis

  Vector v(n);
  if (opts.start != nullptr && opts.start->size() == n) {
    v = *opts.start;
  } else {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < n; ++i) v[i] = unif(rng);
  }
  orthogonalize(v, q, 0);
  if (v.norm() < 1e-14) {
    // Warm start parallel to e: fall back to the seeded vector.
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < n; ++i) v[i] = unif(rng);
    orthogonalize(v, q, 0);
  }
  v.normalize();

  Index k = 0;  // current basis size
  int matvecs = 0;
  Vector w(n);
  EigPair best;
  for (;;) {
    // Expand.
    bool invariant = false;
    while (k < m) {
      q.col(k) = v;
      op(q.col(k), aq.col(k));
      aq.col(k).array() -= aq.col(k).mean();
      ++matvecs;
      ++k;
      if (k == m) break;
      w = aq.col(k - 1);
      orthogonalize(w, q, k);
      const double nw = w.norm();
      const double scale = std::max(1.0, aq.col(k - 1).norm());
      if (nw <= 1e-13 * scale) {
        invariant = true;
        break;
      }
      v = w / nw;
    }

    // Rayleigh-Ritz on the current basis.
    Matrix h = q.leftCols(k).transpose() * aq.leftCols(k);
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const Index target = which == Extreme::Min ? 0 : k - 1;
    const double theta = es.eigenvalues()[target];
    Vector y = es.eigenvectors().col(target);
    Vector x = q.leftCols(k) * y;
    Vector resid = aq.leftCols(k) * y - theta * x;
    const double spectral = es.eigenvalues().cwiseAbs().maxCoeff();
    const double rnorm = resid.norm();

    best.value = theta;
    best.vector = x / x.norm();
    best.matvecs = matvecs;
    if (invariant || k >= n - 1 || rnorm <= opts.tol * std::max(spectral, 1e-300) ||
        spectral == 0.0)
      return best;
    if (matvecs >= max_matvecs)
      throw Error(ErrorCode::NoConvergence,
                  "Lanczos did not converge within " + std::to_string(max_matvecs) +
                      " matvecs (residual " + std::to_string(rnorm) + ")");

    // Thick restart: keep the `keep` Ritz vectors closest to the target end
    // and continue from the (common) residual direction.
    Matrix ysel(k, keep);
    for (Index c = 0; c < keep; ++c)
      ysel.col(c) = es.eigenvectors().col(which == Extreme::Min ? c : k - 1 - c);
    const Matrix qn = q.leftCols(k) * ysel;
    const Matrix aqn = aq.leftCols(k) * ysel;
    q.leftCols(keep) = qn;
    aq.leftCols(keep) = aqn;
    k = keep;
    v = resid;
    orthogonalize(v, q, k);
    const double nv = v.norm();
    if (nv <= 1e-14 * std::max(1.0, spectral)) return best;
    v /= nv;
  }
}

EigPair extreme_eigpair_on_complement(const SymmetricMatrix& m, Extreme which,
                                      const LanczosOptions& opts) {
  const Matrix& a = m.dense();
  auto op = [&a](const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) {
    y.noalias() = a * x;
  };
  return lanczos_extreme_on_complement(op, static_cast<int>(m.order()), which, opts);
}

EigPair extreme_eigpair_on_complement(const SparseSymmetric& m, Extreme which,
                                      const LanczosOptions& opts) {
  auto op = [&m](const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) { m.apply(x, y); };
  return lanczos_extreme_on_complement(op, m.n, which, opts);
}

EigPair dense_extreme_on_complement(const SymmetricMatrix& m, Extreme which) {
  if (m.order() < 2) throw Error(ErrorCode::DimensionMismatch, "e-perp is trivial for n < 2");
  const CenteredEigen eig = centered_eigen(m);
  const Index idx = which == Extreme::Min ? 0 : eig.values.size() - 1;
  EigPair out;
  out.value = eig.values[idx];
  out.vector = eig.vectors.col(idx);
  return out;
}

Points center_rows(const Points& p) {
  Points out = p;
  out.rowwise() -= p.colwise().mean();
  return out;
}

ProcrustesResult procrustes_rmsd(const Points& p_est, const Points& p_true) {
  if (p_est.rows() != p_true.rows() || p_est.cols() != p_true.cols())
    throw Error(ErrorCode::DimensionMismatch, "point sets differ in shape");
  const double n = static_cast<double>(p_est.rows());
  const double scale = std::max({1.0, p_est.cwiseAbs().maxCoeff(), p_true.cwiseAbs().maxCoeff()});
  if (p_est.colwise().sum().cwiseAbs().maxCoeff() > 1e-8 * n * scale ||
      p_true.colwise().sum().cwiseAbs().maxCoeff() > 1e-8 * n * scale)
    throw Error(ErrorCode::ValidationError, "procrustes_rmsd expects centered points");
  Eigen::JacobiSVD<Matrix> svd(p_est.transpose() * p_true, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesResult out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.rmsd = (p_est * out.rotation - p_true).norm() / std::sqrt(n);
  return out;
}

Vector principal_angle_sines(const OrthonormalBasis& u, const OrthonormalBasis& v) {
  if (u.ambient_dim() != v.ambient_dim() || u.cols() != v.cols())
    throw Error(ErrorCode::DimensionMismatch, "bases differ in shape");
  Eigen::JacobiSVD<Matrix> svd(u.matrix().transpose() * v.matrix());
  Vector cosines = svd.singularValues();  // descending -> angles nondecreasing
  Vector sines(cosines.size());
  for (Index k = 0; k < cosines.size(); ++k)
    sines[k] = std::sqrt(std::max(0.0, 1.0 - std::min(1.0, cosines[k]) * std::min(1.0, cosines[k])));
  return sines;
}

SymmetricMatrix gram(const Points& p) { return SymmetricMatrix(Matrix(p * p.transpose())); }

Points factor_gram(const SymmetricMatrix& x, int r) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(x.dense());
  const Index n = x.order();
  Points p = Points::Zero(n, r);
  for (int c = 0; c < r && c < n; ++c) {
    const Index k = n - 1 - c;
    const double lam = std::max(0.0, es.eigenvalues()[k]);
    p.col(c) = std::sqrt(lam) * es.eigenvectors().col(k);
  }
  return p;
}

}  // namespace edm
