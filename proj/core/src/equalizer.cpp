#include "semeq/equalize.hpp"

#include <algorithm>
#include <string>

namespace semeq {
namespace {

void check_pair(const Matrix& tx, const Matrix& rx, const char* what) {
  if (tx.rows() != rx.rows()) {
    throw DimensionMismatch(std::string(what) + ": TX has " + std::to_string(tx.rows()) +
                            " rows, RX has " + std::to_string(rx.rows()));
  }
  if (tx.rows() < 1) throw InvalidInput(std::string(what) + ": no anchors");
}

}  // namespace

std::string_view to_string(EqualizerMethod m) {
  switch (m) {
    case EqualizerMethod::pfe: return "pfe";
    case EqualizerMethod::fe: return "fe";
    case EqualizerMethod::upe: return "upe";
  }
  return "?";
}

EqualizerMethod parse_equalizer_method(std::string_view name) {
  if (name == "pfe" || name == "PFE") return EqualizerMethod::pfe;
  if (name == "fe" || name == "FE") return EqualizerMethod::fe;
  if (name == "upe" || name == "UPE") return EqualizerMethod::upe;
  throw InvalidInput("unknown equalizer method '" + std::string(name) + "'");
}

Matrix normalize_rows(Matrix m) {
  for (Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n > 0.0) m.row(i) /= n;
  }
  return m;
}

Matrix pseudo_inverse(const Matrix& m) {
  const Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  Vector inv = Vector::Zero(s.size());
  if (s.size() > 0 && s(0) > 0.0) {
    const double cutoff = eigenvalue_cutoff(m.rows(), m.cols(), s(0) * s(0));
    for (Index i = 0; i < s.size(); ++i) {
      if (s(i) * s(i) > cutoff) inv(i) = 1.0 / s(i);
    }
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

EqualizerPair::EqualizerPair(EqualizerMethod method, AnalysisOperator tx, AnalysisOperator rx,
                             Matrix post, Index anchor_count)
    : method_(method),
      tx_(std::move(tx)),
      rx_(std::move(rx)),
      post_(std::move(post)),
      anchor_count_(anchor_count) {
  if (post_.cols() != tx_.size()) {
    throw DimensionMismatch("post-equalizer expects " + std::to_string(post_.cols()) +
                            " coefficients, pre-equalizer emits " + std::to_string(tx_.size()));
  }
}

Vector EqualizerPair::pre_equalize(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != tx_dim()) {
    throw DimensionMismatch("pre_equalize: expected dim " + std::to_string(tx_dim()) + ", got " +
                            std::to_string(x.size()));
  }
  const double n = x.norm();
  if (n == 0.0) return Vector::Zero(code_size());
  return tx_.matrix() * (x / n);
}

Vector EqualizerPair::post_equalize(const Eigen::Ref<const Vector>& code) const {
  if (code.size() != code_size()) {
    throw DimensionMismatch("post_equalize: expected " + std::to_string(code_size()) +
                            " coefficients, got " + std::to_string(code.size()));
  }
  return post_ * code;
}

Matrix EqualizerPair::pre_equalize_rows(const Eigen::Ref<const Matrix>& samples) const {
  if (samples.cols() != tx_dim()) {
    throw DimensionMismatch("pre_equalize_rows: expected dim " + std::to_string(tx_dim()) +
                            ", got " + std::to_string(samples.cols()));
  }
  return normalize_rows(samples) * tx_.matrix().transpose();
}

Matrix EqualizerPair::post_equalize_rows(const Eigen::Ref<const Matrix>& codes) const {
  if (codes.cols() != code_size()) {
    throw DimensionMismatch("post_equalize_rows: expected " + std::to_string(code_size()) +
                            " coefficients, got " + std::to_string(codes.cols()));
  }
  return codes * post_.transpose();
}

EqualizerPair build_pfe(const Matrix& anchors_tx, const Matrix& anchors_rx) {
  check_pair(anchors_tx, anchors_rx, "build_pfe");
  AnalysisOperator tx = whiten_to_parseval(AnalysisOperator(normalize_rows(anchors_tx)));
  AnalysisOperator rx = whiten_to_parseval(AnalysisOperator(normalize_rows(anchors_rx)));
  Matrix post = rx.matrix().transpose();
  return EqualizerPair(EqualizerMethod::pfe, std::move(tx), std::move(rx), std::move(post),
                       anchors_tx.rows());
}

EqualizerPair build_fe(const Matrix& anchors_tx, const Matrix& anchors_rx) {
  check_pair(anchors_tx, anchors_rx, "build_fe");
  AnalysisOperator tx(normalize_rows(anchors_tx));
  AnalysisOperator rx(normalize_rows(anchors_rx));
  if (tx.rank() == 0 || rx.rank() == 0) throw RankZero("build_fe: rank-zero anchors");
  Matrix post = pseudo_inverse(rx.matrix());
  return EqualizerPair(EqualizerMethod::fe, std::move(tx), std::move(rx), std::move(post),
                       anchors_tx.rows());
}

Matrix procrustes_alignment(const Matrix& pilots_tx, const Matrix& pilots_rx) {
  check_pair(pilots_tx, pilots_rx, "procrustes_alignment");
  const Matrix cross = pilots_tx.transpose() * pilots_rx;
  const Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

EqualizerPair build_upe(const Matrix& pilots_tx, const Matrix& pilots_rx, Index keep) {
  check_pair(pilots_tx, pilots_rx, "build_upe");
  const Index limit = std::min({pilots_tx.rows(), pilots_tx.cols(), pilots_rx.cols()});
  if (keep < 1 || keep > limit) {
    throw InvalidInput("build_upe: keep=" + std::to_string(keep) + " not in [1, " +
                       std::to_string(limit) + "]");
  }
  const Matrix cross = normalize_rows(pilots_tx).transpose() * normalize_rows(pilots_rx);
  const Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeThinU | Eigen::ComputeThinV);
  AnalysisOperator tx(svd.matrixU().leftCols(keep).transpose());
  AnalysisOperator rx(svd.matrixV().leftCols(keep).transpose());
  Matrix post = svd.matrixV().leftCols(keep);
  return EqualizerPair(EqualizerMethod::upe, std::move(tx), std::move(rx), std::move(post),
                       pilots_tx.rows());
}

EqualizerPair build_equalizer(EqualizerMethod method, const Matrix& anchors_tx,
                              const Matrix& anchors_rx) {
  switch (method) {
    case EqualizerMethod::pfe: return build_pfe(anchors_tx, anchors_rx);
    case EqualizerMethod::fe: return build_fe(anchors_tx, anchors_rx);
    case EqualizerMethod::upe: {
      const Index keep = std::min({anchors_tx.rows(), anchors_tx.cols(), anchors_rx.cols()});
      return build_upe(anchors_tx, anchors_rx, keep);
    }
  }
  throw InvalidInput("unknown equalizer method");
}

}  // namespace semeq
