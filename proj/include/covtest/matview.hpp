#pragma once

// Half-vectorization and the small dense kernel the rest of the library uses.
//
// vech ordering: this library stacks the UPPER triangle ROW by ROW,
//
//     vech(V) = (v11, v12, ..., v1d, v22, ..., v2d, ..., vdd),
//
// which is NOT the column-major lower-triangular order used by most
// statistics texts and by Eigen's storage. For a symmetric matrix the two
// orders hold the same entries in a different sequence; use
// vech_to_lower_colmajor / lower_colmajor_to_vech to convert.

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace covtest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Number of entries in vech of a d x d matrix, d(d+1)/2.
constexpr Index vech_length(Index d) noexcept { return d * (d + 1) / 2; }

/// Position of entry (r, s), r <= s, inside vech of a d x d matrix.
constexpr Index vech_index(Index d, Index r, Index s) noexcept {
  return r * d - r * (r - 1) / 2 + (s - r);
}

/// Source dimension d with d(d+1)/2 == p, or nullopt if p is not triangular.
std::optional<Index> triangular_root(Index p) noexcept;

/// Square real matrix that is exactly symmetric.
class SymMatrix {
 public:
  SymMatrix() = default;
  /// Throws Error{NotSymmetric} unless m is square with m(r,s) == m(s,r).
  explicit SymMatrix(Matrix m);

  /// (m + m^T) / 2, for results that are symmetric only up to rounding.
  static SymMatrix symmetrized(const Matrix& m);
  static SymMatrix identity(Index d);
  static SymMatrix zero(Index d);

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(Index r, Index s) const { return m_(r, s); }
  double trace() const { return m_.trace(); }

 private:
  Matrix m_;
};

/// vech of a symmetric matrix, stored with its source dimension.
class VechVector {
 public:
  VechVector() = default;
  /// Throws Error{NonTriangularLength} when values.size() is not d(d+1)/2.
  explicit VechVector(Vector values);

  Index source_dim() const noexcept { return d_; }
  Index size() const noexcept { return values_.size(); }
  const Vector& values() const noexcept { return values_; }
  double operator[](Index i) const { return values_[i]; }

 private:
  Index d_ = 0;
  Vector values_;
};

VechVector vech(const SymMatrix& s);
SymMatrix unvech(const VechVector& v);

/// Writes vech of the upper triangle of m into out (size d(d+1)/2). No
/// symmetry check; used on hot paths where m is symmetric by construction.
void vech_into(const Matrix& m, Eigen::Ref<Vector> out);

/// h_d: ones at the diagonal positions of vech, zeros elsewhere, so that
/// h_d^T vech(V) == trace(V).
Vector diagonal_indicator(Index d);

Vector vech_to_lower_colmajor(const VechVector& v);
VechVector lower_colmajor_to_vech(const Vector& lower, Index d);

/// P_a = I_a - J_a / a.
Matrix centering_matrix(Index a);

Matrix kron(const Matrix& a, const Matrix& b);

/// Block-diagonal assembly; throws Error{EmptyList} on an empty list.
Matrix direct_sum(std::span<const Matrix> blocks);

/// max(rows, cols) * machine epsilon.
double default_pinv_tolerance(const Matrix& a);

/// Moore-Penrose inverse by SVD. Singular values at or below
/// rel_tol * sigma_max are treated as zero.
Matrix mp_inverse(const Matrix& a, std::optional<double> rel_tol = std::nullopt);

/// Number of singular values above rel_tol * sigma_max.
Index numerical_rank(const Matrix& a, double rel_tol = 1e-10);

struct SymEigen {
  Vector values;   // descending
  Matrix vectors;  // column j belongs to values[j]
};

/// Throws Error{NoConvergence} if the solver does not converge.
SymEigen sym_eigen(const SymMatrix& s);

/// Symmetric square root L (L L^T == S) via eigendecomposition. Eigenvalues in
/// [-clamp_tol * |S|, 0) are clamped to zero; anything more negative throws
/// Error{NotPSD}. |S| is the largest absolute eigenvalue.
Matrix psd_factor(const SymMatrix& s, double clamp_tol = 1e-10);

}  // namespace covtest
