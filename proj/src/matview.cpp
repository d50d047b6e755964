#include "covtest/matview.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "covtest/error.hpp"

namespace covtest {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonTriangularLength: return "NonTriangularLength";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::BadGroupCount: return "BadGroupCount";
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::ZeroTrace: return "ZeroTrace";
    case ErrorCode::RankZero: return "RankZero";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::UnsupportedCombination: return "UnsupportedCombination";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::GroupTooSmall: return "GroupTooSmall";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

std::optional<Index> triangular_root(Index p) noexcept {
  if (p <= 0) return std::nullopt;
  auto d = static_cast<Index>(std::floor((std::sqrt(8.0 * static_cast<double>(p) + 1.0) - 1.0) / 2.0));
  // guard against rounding in the square root
  for (Index c = std::max<Index>(d - 1, 1); c <= d + 1; ++c)
    if (vech_length(c) == p) return c;
  return std::nullopt;
}

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols())
    throw Error(ErrorCode::NotSymmetric, "matrix is not square");
  for (Index r = 0; r < m_.rows(); ++r)
    for (Index s = r + 1; s < m_.cols(); ++s)
      if (m_(r, s) != m_(s, r)) {
        std::ostringstream os;
        os << "entry (" << r << "," << s << ") differs from its transpose";
        throw Error(ErrorCode::NotSymmetric, os.str());
      }
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::NotSymmetric, "matrix is not square");
  Matrix s = m;
  for (Index r = 0; r < s.rows(); ++r)
    for (Index c = r + 1; c < s.cols(); ++c) {
      double avg = 0.5 * (m(r, c) + m(c, r));
      s(r, c) = avg;
      s(c, r) = avg;
    }
  return SymMatrix(std::move(s));
}

SymMatrix SymMatrix::identity(Index d) { return SymMatrix(Matrix::Identity(d, d)); }
SymMatrix SymMatrix::zero(Index d) { return SymMatrix(Matrix::Zero(d, d)); }

VechVector::VechVector(Vector values) : values_(std::move(values)) {
  auto d = triangular_root(values_.size());
  if (!d) {
    throw Error(ErrorCode::NonTriangularLength,
                "length " + std::to_string(values_.size()) + " is not d(d+1)/2 for any d");
  }
  d_ = *d;
}

void vech_into(const Matrix& m, Eigen::Ref<Vector> out) {
  const Index d = m.rows();
  Index k = 0;
  for (Index r = 0; r < d; ++r)
    for (Index s = r; s < d; ++s) out[k++] = m(r, s);
}

VechVector vech(const SymMatrix& s) {
  Vector out(vech_length(s.dim()));
  vech_into(s.matrix(), out);
  return VechVector(std::move(out));
}

SymMatrix unvech(const VechVector& v) {
  const Index d = v.source_dim();
  Matrix m(d, d);
  Index k = 0;
  for (Index r = 0; r < d; ++r)
    for (Index s = r; s < d; ++s) {
      m(r, s) = v[k];
      m(s, r) = v[k];
      ++k;
    }
  return SymMatrix(std::move(m));
}

Vector diagonal_indicator(Index d) {
  Vector h = Vector::Zero(vech_length(d));
  for (Index r = 0; r < d; ++r) h[vech_index(d, r, r)] = 1.0;
  return h;
}

Vector vech_to_lower_colmajor(const VechVector& v) {
  const Index d = v.source_dim();
  Vector out(v.size());
  Index k = 0;
  for (Index c = 0; c < d; ++c)
    for (Index r = c; r < d; ++r) out[k++] = v[vech_index(d, c, r)];
  return out;
}

VechVector lower_colmajor_to_vech(const Vector& lower, Index d) {
  if (lower.size() != vech_length(d))
    throw Error(ErrorCode::NonTriangularLength, "length does not match d(d+1)/2");
  Vector out(lower.size());
  Index k = 0;
  for (Index c = 0; c < d; ++c)
    for (Index r = c; r < d; ++r) out[vech_index(d, c, r)] = lower[k++];
  return VechVector(std::move(out));
}

Matrix centering_matrix(Index a) {
  return Matrix::Identity(a, a) - Matrix::Constant(a, a, 1.0 / static_cast<double>(a));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix direct_sum(std::span<const Matrix> blocks) {
  if (blocks.empty()) throw Error(ErrorCode::EmptyList, "direct_sum needs at least one block");
  Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

double default_pinv_tolerance(const Matrix& a) {
  return static_cast<double>(std::max(a.rows(), a.cols())) * std::numeric_limits<double>::epsilon();
}

Matrix mp_inverse(const Matrix& a, std::optional<double> rel_tol) {
  if (a.size() == 0) return Matrix(a.cols(), a.rows());
  const double tol = rel_tol.value_or(default_pinv_tolerance(a));
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = tol * (sv.size() ? sv[0] : 0.0);
  Vector inv = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) inv[i] = 1.0 / sv[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Index numerical_rank(const Matrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0.0) return 0;
  const double cutoff = rel_tol * sv[0];
  return static_cast<Index>((sv.array() > cutoff).count());
}

SymEigen sym_eigen(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s.matrix());
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::NoConvergence, "symmetric eigensolver did not converge");
  // Eigen returns ascending order
  SymEigen out{solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
  return out;
}

Matrix psd_factor(const SymMatrix& s, double clamp_tol) {
  const Index d = s.dim();
  if (d == 0) return Matrix(0, 0);
  auto eig = sym_eigen(s);
  const double scale = std::max(std::abs(eig.values[0]), std::abs(eig.values[d - 1]));
  if (scale == 0.0) return Matrix::Zero(d, d);
  Vector root(d);
  for (Index i = 0; i < d; ++i) {
    double lambda = eig.values[i];
    if (lambda < -clamp_tol * scale) {
      std::ostringstream os;
      os << "eigenvalue " << lambda << " below -" << clamp_tol << " * " << scale;
      throw Error(ErrorCode::NotPSD, os.str());
    }
    root[i] = std::sqrt(std::max(lambda, 0.0));
  }
  return eig.vectors * root.asDiagonal() * eig.vectors.transpose();
}

}  // namespace covtest
