#pragma once

#include <string>
#include <string_view>

#include "covtest/matview.hpp"

namespace covtest {

/// quadratic: symmetric projection-style matrix (m == a p for most scenarios).
/// reduced:   fewer rows, same null set, cheaper to resample.
/// row_embedded: the single-constraint-in-a-p-row-matrix variant e_1 h_d^T.
enum class HypothesisForm { quadratic, reduced, row_embedded };

std::string_view to_string(HypothesisForm f);
HypothesisForm parse_form(std::string_view s);

/// Null hypothesis C v = zeta over the stacked vech'd covariances
/// v = (vech(V_1), ..., vech(V_a)).
struct HypothesisSpec {
  Matrix C;
  Vector zeta;
  Index groups = 1;
  Index dim = 1;
  std::string scenario;
  HypothesisForm form = HypothesisForm::quadratic;

  Index rows() const noexcept { return C.rows(); }
  Index vech_dim() const noexcept { return vech_length(dim); }
  /// Columns of C acting on group i's vech block.
  auto group_block(Index i) const { return C.middleCols(i * vech_dim(), vech_dim()); }
};

/// V_1 = ... = V_a. quadratic: P_a (x) I_p. reduced: rows (e_i - e_{i+1})^T (x) I_p.
HypothesisSpec equal_covariances(Index a, Index d, HypothesisForm form = HypothesisForm::quadratic);

/// V_1 = Sigma0 for a single group: C = I_p, zeta = vech(Sigma0).
HypothesisSpec given_covariance(const SymMatrix& sigma0);

/// V_11 = ... = V_dd for a single group.
HypothesisSpec equal_diagonal(Index d, HypothesisForm form = HypothesisForm::quadratic);

/// tr(V_1) = ... = tr(V_a).
HypothesisSpec equal_traces(Index a, Index d, HypothesisForm form = HypothesisForm::quadratic);

/// tr(V_1) = gamma for a single group. Reduced (the default) is one row.
HypothesisSpec given_trace(Index d, double gamma, HypothesisForm form = HypothesisForm::reduced);

enum class TwoWayEffect { main_a, interaction };

/// Trace effects in an a x b crossed layout, groups ordered (i1, i2) with i2
/// varying fastest.
HypothesisSpec twoway_trace_effects(Index a, Index b, Index d, TwoWayEffect effect);

/// User-supplied C and zeta, checked against (a, d).
HypothesisSpec custom_hypothesis(Matrix C, Vector zeta, Index a, Index d);

/// Checks column count a p, m <= a p, zeta length and finiteness. Throws
/// Error{DimensionMismatch} or Error{NonFinite}.
void validate(const HypothesisSpec& spec, Index a, Index d);

}  // namespace covtest
