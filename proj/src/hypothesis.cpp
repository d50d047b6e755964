#include "covtest/hypothesis.hpp"

#include "covtest/error.hpp"

namespace covtest {

std::string_view to_string(HypothesisForm f) {
  switch (f) {
    case HypothesisForm::quadratic: return "quadratic";
    case HypothesisForm::reduced: return "reduced";
    case HypothesisForm::row_embedded: return "row_embedded";
  }
  return "?";
}

HypothesisForm parse_form(std::string_view s) {
  if (s == "quadratic") return HypothesisForm::quadratic;
  if (s == "reduced") return HypothesisForm::reduced;
  if (s == "row_embedded" || s == "embedded") return HypothesisForm::row_embedded;
  throw Error(ErrorCode::ConfigError, "unknown hypothesis form '" + std::string(s) + "'");
}

namespace {

void require_groups(Index a, Index min) {
  if (a < min)
    throw Error(ErrorCode::BadGroupCount, "need at least " + std::to_string(min) + " groups, got " + std::to_string(a));
}

void require_dim(Index d, Index min) {
  if (d < min)
    throw Error(ErrorCode::BadDimension, "need d >= " + std::to_string(min) + ", got " + std::to_string(d));
}

// (a-1) x a successive-difference contrasts, row i = e_i - e_{i+1}
Matrix successive_differences(Index a) {
  Matrix m = Matrix::Zero(a - 1, a);
  for (Index i = 0; i + 1 < a; ++i) {
    m(i, i) = 1.0;
    m(i, i + 1) = -1.0;
  }
  return m;
}

HypothesisSpec make(Matrix C, Vector zeta, Index a, Index d, std::string scenario, HypothesisForm form) {
  HypothesisSpec s{std::move(C), std::move(zeta), a, d, std::move(scenario), form};
  validate(s, a, d);
  return s;
}

}  // namespace

HypothesisSpec equal_covariances(Index a, Index d, HypothesisForm form) {
  require_groups(a, 2);
  require_dim(d, 1);
  if (form == HypothesisForm::row_embedded)
    throw Error(ErrorCode::UnsupportedCombination, "equal_covariances has no row_embedded form");
  const Index p = vech_length(d);
  Matrix eye = Matrix::Identity(p, p);
  Matrix C = form == HypothesisForm::quadratic ? kron(centering_matrix(a), eye)
                                               : kron(successive_differences(a), eye);
  Vector zeta = Vector::Zero(C.rows());
  return make(std::move(C), std::move(zeta), a, d, "equal_covariances", form);
}

HypothesisSpec given_covariance(const SymMatrix& sigma0) {
  const Index d = sigma0.dim();
  require_dim(d, 1);
  const Index p = vech_length(d);
  return make(Matrix::Identity(p, p), vech(sigma0).values(), 1, d, "given_covariance", HypothesisForm::quadratic);
}

HypothesisSpec equal_diagonal(Index d, HypothesisForm form) {
  require_dim(d, 2);
  const Index p = vech_length(d);
  const Vector h = diagonal_indicator(d);
  Matrix C;
  if (form == HypothesisForm::quadratic) {
    C = Matrix(h.asDiagonal()) - h * h.transpose() / static_cast<double>(d);
  } else if (form == HypothesisForm::reduced) {
    // row j encodes v11 - v_{j+1, j+1} = 0
    C = Matrix::Zero(d - 1, p);
    for (Index j = 0; j + 1 < d; ++j) {
      C(j, vech_index(d, 0, 0)) = 1.0;
      C(j, vech_index(d, j + 1, j + 1)) = -1.0;
    }
  } else {
    throw Error(ErrorCode::UnsupportedCombination, "equal_diagonal has no row_embedded form");
  }
  Vector zeta = Vector::Zero(C.rows());
  return make(std::move(C), std::move(zeta), 1, d, "equal_diagonal", form);
}

HypothesisSpec equal_traces(Index a, Index d, HypothesisForm form) {
  require_groups(a, 2);
  require_dim(d, 1);
  const Vector h = diagonal_indicator(d);
  const double dd = static_cast<double>(d);
  Matrix C;
  if (form == HypothesisForm::quadratic) {
    C = kron(centering_matrix(a), h * h.transpose() / dd);
  } else if (form == HypothesisForm::reduced) {
    C = kron(successive_differences(a), Matrix(h.transpose() / dd));
  } else {
    throw Error(ErrorCode::UnsupportedCombination, "equal_traces has no row_embedded form");
  }
  Vector zeta = Vector::Zero(C.rows());
  return make(std::move(C), std::move(zeta), a, d, "equal_traces", form);
}

HypothesisSpec given_trace(Index d, double gamma, HypothesisForm form) {
  require_dim(d, 1);
  const Index p = vech_length(d);
  const Vector h = diagonal_indicator(d);
  const double dd = static_cast<double>(d);
  Matrix C;
  Vector zeta;
  switch (form) {
    case HypothesisForm::reduced:
      C = h.transpose() / dd;
      zeta = Vector::Constant(1, gamma / dd);
      break;
    case HypothesisForm::quadratic:
      C = h * h.transpose() / dd;
      zeta = h * gamma / dd;
      break;
    case HypothesisForm::row_embedded:
      C = Matrix::Zero(p, p);
      C.row(0) = h.transpose();
      zeta = Vector::Zero(p);
      zeta[0] = gamma;
      break;
  }
  return make(std::move(C), std::move(zeta), 1, d, "given_trace", form);
}

HypothesisSpec twoway_trace_effects(Index a, Index b, Index d, TwoWayEffect effect) {
  require_groups(a, 2);
  require_groups(b, 2);
  require_dim(d, 1);
  const Vector h = diagonal_indicator(d);
  const Matrix trace_part = h * h.transpose() / static_cast<double>(d);
  const Matrix factor_b = effect == TwoWayEffect::main_a
                              ? Matrix(Matrix::Constant(b, b, 1.0 / static_cast<double>(b)))
                              : centering_matrix(b);
  Matrix C = kron(kron(centering_matrix(a), factor_b), trace_part);
  Vector zeta = Vector::Zero(C.rows());
  return make(std::move(C), std::move(zeta), a * b, d,
              effect == TwoWayEffect::main_a ? "twoway_main_a" : "twoway_interaction",
              HypothesisForm::quadratic);
}

HypothesisSpec custom_hypothesis(Matrix C, Vector zeta, Index a, Index d) {
  return make(std::move(C), std::move(zeta), a, d, "custom", HypothesisForm::quadratic);
}

void validate(const HypothesisSpec& spec, Index a, Index d) {
  const Index ap = a * vech_length(d);
  if (spec.C.cols() != ap)
    throw Error(ErrorCode::DimensionMismatch, "C has " + std::to_string(spec.C.cols()) + " columns, expected a*p = " +
                                                  std::to_string(ap));
  if (spec.C.rows() < 1 || spec.C.rows() > ap)
    throw Error(ErrorCode::DimensionMismatch, "C must have between 1 and a*p = " + std::to_string(ap) + " rows");
  if (spec.zeta.size() != spec.C.rows())
    throw Error(ErrorCode::DimensionMismatch, "zeta length " + std::to_string(spec.zeta.size()) +
                                                  " does not match C rows " + std::to_string(spec.C.rows()));
  if (!spec.C.allFinite() || !spec.zeta.allFinite())
    throw Error(ErrorCode::NonFinite, "hypothesis contains non-finite entries");
}

}  // namespace covtest
