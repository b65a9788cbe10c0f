#include "semeq/frame.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace semeq {
namespace {

Eigen::BDCSVD<Matrix> thin_svd(const Matrix& m, bool vectors) {
  const unsigned opts = vectors ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0U;
  return Eigen::BDCSVD<Matrix>(m, opts);
}

Index numerical_rank(const Vector& singular, Index rows, Index cols) {
  if (singular.size() == 0 || singular(0) <= 0.0) return 0;
  const double cutoff = eigenvalue_cutoff(rows, cols, singular(0) * singular(0));
  Index r = 0;
  for (Index i = 0; i < singular.size(); ++i) {
    if (singular(i) * singular(i) > cutoff) ++r;
  }
  return r;
}

void require_dim(Index expected, Index actual, const char* what) {
  if (expected != actual) {
    throw DimensionMismatch(std::string(what) + ": expected length " + std::to_string(expected) +
                            ", got " + std::to_string(actual));
  }
}

}  // namespace

double eigenvalue_cutoff(Index rows, Index cols, double largest_eigenvalue) noexcept {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() *
         largest_eigenvalue;
}

AnalysisOperator::AnalysisOperator(Matrix rows) : matrix_(std::move(rows)) {
  if (matrix_.rows() < 1 || matrix_.cols() < 1) {
    throw InvalidInput("analysis operator needs at least one row and one column");
  }
  if (!matrix_.allFinite()) throw InvalidInput("analysis operator has non-finite entries");
  const auto svd = thin_svd(matrix_, false);
  rank_ = numerical_rank(svd.singularValues(), matrix_.rows(), matrix_.cols());
}

AnalysisOperator::AnalysisOperator(Matrix rows, Index rank, bool whitened)
    : matrix_(std::move(rows)), rank_(rank), whitened_(whitened) {}

FrameBounds frame_bounds(const AnalysisOperator& frame) {
  const auto svd = thin_svd(frame.matrix(), false);
  const Vector& s = svd.singularValues();
  FrameBounds b;
  b.upper = s(0) * s(0);
  // A rank-deficient frame (in particular N < d) leaves a null direction.
  b.lower = frame.rank() < frame.dim() ? 0.0 : s(s.size() - 1) * s(s.size() - 1);
  return b;
}

Matrix frame_operator(const AnalysisOperator& frame) {
  const Matrix& f = frame.matrix();
  Matrix s = f.transpose() * f;
  // Symmetrize away rounding so downstream eigen-solvers see an exact
  // symmetric matrix.
  return 0.5 * (s + s.transpose());
}

AnalysisOperator whiten_to_parseval(const AnalysisOperator& frame) {
  if (frame.rank() == 0) throw RankZero("cannot whiten a rank-zero frame");
  // F = U S V^T gives S^{+1/2} = V_r S_r^{-1} V_r^T, hence F S^{+1/2} = U_r V_r^T.
  const auto svd = thin_svd(frame.matrix(), true);
  const Index r = numerical_rank(svd.singularValues(), frame.size(), frame.dim());
  Matrix whitened = svd.matrixU().leftCols(r) * svd.matrixV().leftCols(r).transpose();
  return AnalysisOperator(std::move(whitened), r, true);
}

Vector analysis(const AnalysisOperator& frame, const Eigen::Ref<const Vector>& x) {
  require_dim(frame.dim(), x.size(), "analysis");
  return frame.matrix() * x;
}

Vector synthesis(const AnalysisOperator& frame, const Eigen::Ref<const Vector>& coeffs) {
  require_dim(frame.size(), coeffs.size(), "synthesis");
  return frame.matrix().transpose() * coeffs;
}

Matrix analysis_rows(const AnalysisOperator& frame, const Eigen::Ref<const Matrix>& samples) {
  require_dim(frame.dim(), samples.cols(), "analysis_rows");
  return samples * frame.matrix().transpose();
}

double condition_number(const AnalysisOperator& frame) {
  if (frame.rank() == 0) throw RankZero("condition number of a rank-zero frame");
  const auto svd = thin_svd(frame.matrix(), false);
  const Vector& s = svd.singularValues();
  return s(0) / s(frame.rank() - 1);
}

}  // namespace semeq
