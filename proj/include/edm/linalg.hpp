#pragma once

// Dense symmetric linear algebra for EDM operators: the Gram-to-distance map
// K, its adjoint and pseudoinverse, projections onto centered PSD matrices of
// bounded rank, extreme eigenpairs restricted to the complement of e, and
// Procrustes alignment.

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "edm/error.hpp"

namespace edm {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Point configuration: n x r, one point per row.
using Points = Eigen::MatrixXd;

/// Eigenvalues below this are treated as zero when counting rank.
inline constexpr double kEigenvalueFloor = 1e-10;

/// Symmetric n x n matrix. The upper triangle is authoritative: construction
/// from a general matrix mirrors it into the lower triangle so that
/// (i, j) and (j, i) are always bit-identical.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(Index n) : m_(Matrix::Zero(n, n)) {}
  explicit SymmetricMatrix(const Matrix& m);

  static SymmetricMatrix zero(Index n) { return SymmetricMatrix(n); }
  static SymmetricMatrix identity(Index n) {
    return SymmetricMatrix(Matrix::Identity(n, n));
  }

  Index order() const { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }

  void set(Index i, Index j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }
  void add(Index i, Index j, double v) {
    m_(i, j) += v;
    if (i != j) m_(j, i) += v;
  }

  const Matrix& dense() const { return m_; }

  SymmetricMatrix& operator+=(const SymmetricMatrix& o) {
    m_ += o.m_;
    return *this;
  }
  SymmetricMatrix& operator*=(double s) {
    m_ *= s;
    return *this;
  }
  friend SymmetricMatrix operator+(SymmetricMatrix a, const SymmetricMatrix& b) {
    a += b;
    return a;
  }
  friend SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b) {
    return SymmetricMatrix(Matrix(a.m_ - b.m_));
  }
  friend SymmetricMatrix operator*(double s, SymmetricMatrix a) {
    a *= s;
    return a;
  }

  /// Trace inner product.
  double inner(const SymmetricMatrix& o) const { return (m_.array() * o.m_.array()).sum(); }
  double norm() const { return m_.norm(); }
  double trace() const { return m_.trace(); }

 private:
  Matrix m_;
};

struct Edge {
  int i = 0;
  int j = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Values indexed by an edge list; edges are strictly increasing
/// lexicographically with i < j (0-based internally).
struct EdgeVector {
  std::vector<Edge> edges;
  std::vector<double> values;

  std::size_t size() const { return edges.size(); }
  /// Throws ValidationError unless sorted, duplicate-free and within [0, n).
  void validate(int n) const;
};

/// Symmetric matrix stored as diagonal plus one value per edge. Used for
/// gradients whose off-diagonal support is the graph's adjacency pattern.
struct SparseSymmetric {
  int n = 0;
  std::vector<Edge> edges;
  std::vector<double> offdiag;
  Vector diag;

  void apply(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) const;
  double quadratic_form(const Eigen::Ref<const Vector>& x) const;
  SymmetricMatrix to_dense() const;
};

class OrthonormalBasis {
 public:
  OrthonormalBasis() = default;
  /// Validates U^T U = I to 1e-10; `centered` additionally requires U^T e = 0.
  explicit OrthonormalBasis(Matrix columns, bool centered = false);

  const Matrix& matrix() const { return u_; }
  Index ambient_dim() const { return u_.rows(); }
  Index cols() const { return u_.cols(); }
  bool centered() const { return centered_; }

 private:
  Matrix u_;
  bool centered_ = false;
};

// ---- EDM operators ---------------------------------------------------------

/// K(X)_ij = X_ii + X_jj - 2 X_ij.
SymmetricMatrix k_map(const SymmetricMatrix& x);

/// K*(D) = 2 (Diag(D e) - D).
SymmetricMatrix k_adjoint(const SymmetricMatrix& d);

/// K^dagger(D) = -1/2 J D J for hollow D.
SymmetricMatrix k_pinv(const SymmetricMatrix& d);

/// K* applied to the symmetric matrix carrying `values` on the edge pattern
/// (both triangles), returned in sparse edge-plus-diagonal form.
SparseSymmetric k_adjoint_sparse(int n, const std::vector<Edge>& edges,
                                 const std::vector<double>& values);

/// P(K(X)): the EDM restricted to `edges`.
std::vector<double> k_map_on_edges(const SymmetricMatrix& x,
                                   const std::vector<Edge>& edges);

/// P(K(P P^T)) computed from points directly.
std::vector<double> edge_distances(const Points& p, const std::vector<Edge>& edges);

// ---- centered projections -------------------------------------------------

/// n x (n-1) orthonormal basis of e-perp: columns 2..n of the Householder
/// reflector that maps e_1 onto e / sqrt(n).
Matrix centered_complement_basis(Index n);

struct CenteredEigen {
  Vector values;   // ascending, length n-1
  Matrix vectors;  // n x (n-1), columns orthogonal to e
};

/// Eigendecomposition of X restricted to e-perp (V^T X V with V the
/// Householder complement basis), lifted back to R^n.
CenteredEigen centered_eigen(const SymmetricMatrix& x);

/// Nearest matrix of rank <= r in the centered PSD cone (Frobenius).
SymmetricMatrix project_centered_psd_rank(const SymmetricMatrix& x, int r);

/// Same projection given a precomputed centered eigendecomposition.
SymmetricMatrix project_centered_psd_rank(const CenteredEigen& eig, int r);

/// Rank counting with the kEigenvalueFloor convention.
int numerical_rank(const Vector& eigenvalues, double relative_tol = 0.0);

// ---- extreme eigenpairs on e-perp -----------------------------------------

enum class Extreme { Min, Max };

struct EigPair {
  double value = 0.0;
  Vector vector;
  int matvecs = 0;
};

struct LanczosOptions {
  /// Maximum matrix-vector products; 0 means 10 n.
  int max_matvecs = 0;
  /// Convergence when ||A x - theta x|| <= tol * spectral scale.
  double tol = 1e-10;
  /// Krylov basis size before thick restart; clamped to n - 1.
  int basis_size = 40;
  std::uint64_t seed = 0x5eedu;
  /// Optional warm start (need not be orthogonal to e).
  const Vector* start = nullptr;
};

using LinearOperator =
    std::function<void(const Eigen::Ref<const Vector>&, Eigen::Ref<Vector>)>;

/// Thick-restart Lanczos for the extreme eigenpair of J M J on e-perp.
/// Throws NoConvergence when the matvec budget is exhausted.
EigPair lanczos_extreme_on_complement(const LinearOperator& op, int n,
                                      Extreme which, const LanczosOptions& opts = {});

EigPair extreme_eigpair_on_complement(const SymmetricMatrix& m, Extreme which,
                                      const LanczosOptions& opts = {});
EigPair extreme_eigpair_on_complement(const SparseSymmetric& m, Extreme which,
                                      const LanczosOptions& opts = {});

/// Dense reference path used as the NoConvergence fallback.
EigPair dense_extreme_on_complement(const SymmetricMatrix& m, Extreme which);

// ---- alignment ------------------------------------------------------------

struct ProcrustesResult {
  double rmsd = 0.0;
  Matrix rotation;  // r x r orthogonal, reflections allowed
};

/// min over orthogonal U of (1/sqrt n) ||P_est U - P_true||_F.
/// Both inputs must be centered (column sums within 1e-8).
ProcrustesResult procrustes_rmsd(const Points& p_est, const Points& p_true);

/// Sines of the principal angles between range U and range V, nondecreasing.
Vector principal_angle_sines(const OrthonormalBasis& u, const OrthonormalBasis& v);

Points center_rows(const Points& p);

/// Gram matrix P P^T.
SymmetricMatrix gram(const Points& p);

/// Factor X ~ P P^T keeping the r largest (clipped) eigenvalues.
Points factor_gram(const SymmetricMatrix& x, int r);

}  // namespace edm
