#pragma once

#include "semeq/types.hpp"

namespace semeq {

struct FrameBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// A finite frame stored as its analysis operator: an N x d matrix whose rows
/// are the frame vectors. Instances are immutable once built.
class AnalysisOperator {
 public:
  /// Validates the matrix (non-empty, finite entries) and computes its
  /// numerical rank. Throws InvalidInput otherwise.
  explicit AnalysisOperator(Matrix rows);

  Index size() const noexcept { return matrix_.rows(); }
  Index dim() const noexcept { return matrix_.cols(); }
  Index rank() const noexcept { return rank_; }
  bool whitened() const noexcept { return whitened_; }
  const Matrix& matrix() const noexcept { return matrix_; }

 private:
  friend AnalysisOperator whiten_to_parseval(const AnalysisOperator& frame);
  AnalysisOperator(Matrix rows, Index rank, bool whitened);

  Matrix matrix_;
  Index rank_ = 0;
  bool whitened_ = false;
};

/// Threshold below which an eigenvalue of the frame operator counts as zero:
/// max(N, d) * eps * lambda_max.
double eigenvalue_cutoff(Index rows, Index cols, double largest_eigenvalue) noexcept;

/// Optimal frame bounds: squared extreme singular values over all d directions.
/// The lower bound is 0 for a rank-deficient frame.
FrameBounds frame_bounds(const AnalysisOperator& frame);

/// S = F^T F.
Matrix frame_operator(const AnalysisOperator& frame);

/// F S^{+1/2}. For a full-column-rank frame this is Parseval (F~^T F~ = I_d);
/// for an incomplete set it is a partial isometry whose frame operator is the
/// orthogonal projector onto the row span. Throws RankZero for a zero matrix.
AnalysisOperator whiten_to_parseval(const AnalysisOperator& frame);

/// c_n = <x, f_n>.
Vector analysis(const AnalysisOperator& frame, const Eigen::Ref<const Vector>& x);

/// x = sum_n c_n g_n.
Vector synthesis(const AnalysisOperator& frame, const Eigen::Ref<const Vector>& coeffs);

/// Row-batched analysis: each row of `samples` is one vector, each row of the
/// result its coefficients.
Matrix analysis_rows(const AnalysisOperator& frame, const Eigen::Ref<const Matrix>& samples);

/// Ratio of the largest to the smallest nonzero singular value.
double condition_number(const AnalysisOperator& frame);

}  // namespace semeq
