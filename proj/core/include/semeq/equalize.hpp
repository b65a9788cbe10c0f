#pragma once

#include "semeq/frame.hpp"
#include "semeq/types.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace semeq {

// ---------------------------------------------------------------------------
// Uniform quantizer on [-1, 1]
// ---------------------------------------------------------------------------

inline constexpr int kMaxBits = 32;

/// Transmitted payload: N frame coefficients at `bits` bits each.
struct SemanticCode {
  Vector coeffs;
  int bits = kMaxBits;
  std::size_t source_user = 0;
};

/// Step between adjacent levels: 2 / (2^q - 1).
double quantizer_step(int bits);

/// Nearest of the 2^q levels -1 + i*step; ties go to the lower level. Values
/// outside [-1, 1] are clamped first.
double quantize_value(double value, int bits);

/// Quantizes every coefficient. Out-of-range coefficients are clamped and a
/// warning is logged.
SemanticCode quantize(const SemanticCode& code, int bits);

/// Batch form used by the evaluation harness; returns the number of clamped
/// entries.
Index quantize_in_place(Eigen::Ref<Matrix> coeffs, int bits);

/// (N * q) / (N_abs * 32).
double compression_factor(Index coeffs, int bits, Index absolute_dim);

// ---------------------------------------------------------------------------
// Anchor selection
// ---------------------------------------------------------------------------

enum class AnchorStrategy { prototypical, uniform };

std::string_view to_string(AnchorStrategy s);
AnchorStrategy parse_anchor_strategy(std::string_view name);

struct AnchorSpec {
  AnchorStrategy strategy = AnchorStrategy::prototypical;
  Index count = 1;        // N
  Index per_cluster = 1;  // M
  std::uint64_t seed = 0;
};

/// Index sets into the embedding rows; one set per anchor.
using SupportSets = std::vector<std::vector<Index>>;

struct AnchorSelection {
  SupportSets support;
  Matrix anchors;  // N x d
};

struct KMeansResult {
  Matrix centroids;           // k x d
  std::vector<Index> labels;  // one per point
  int iterations = 0;
  bool converged = false;
};

/// Lloyd's algorithm with k-means++ seeding. Converges when no centroid moves
/// by more than `tolerance` (Euclidean). Empty clusters are reseeded with the
/// point farthest from its centroid, so every returned cluster is non-empty.
KMeansResult kmeans(const Matrix& points, Index k, std::uint64_t seed, int max_iterations = 100,
                    double tolerance = 1e-6);

/// Prototypical anchors: cluster the embeddings into N groups, draw M members
/// of each group without replacement and average them. Clusters smaller than M
/// contribute all their members.
AnchorSelection prototypical_anchors(const Matrix& embeddings, const AnchorSpec& spec);

/// Same, with a caller-provided support family (clustering skipped).
AnchorSelection prototypical_anchors(const Matrix& embeddings, SupportSets support);

/// Row means of `embeddings` over each support set. This is how the receiver
/// builds its own anchors from a support family chosen at the transmitter.
Matrix anchors_from_support(const Matrix& embeddings, const SupportSets& support);

/// N rows drawn uniformly without replacement (singleton support sets).
AnchorSelection uniform_anchors(const Matrix& embeddings, Index count, std::uint64_t seed);

AnchorSelection select_anchors(const Matrix& embeddings, const AnchorSpec& spec);

// ---------------------------------------------------------------------------
// Equalizers
// ---------------------------------------------------------------------------

enum class EqualizerMethod { pfe, fe, upe };

std::string_view to_string(EqualizerMethod m);
EqualizerMethod parse_equalizer_method(std::string_view name);

/// A matched pre-equalizer (TX analysis) and post-equalizer (RX synthesis)
/// built from index-aligned anchor or pilot rows.
class EqualizerPair {
 public:
  EqualizerPair(EqualizerMethod method, AnalysisOperator tx, AnalysisOperator rx, Matrix post,
                Index anchor_count);

  EqualizerMethod method() const noexcept { return method_; }
  const AnalysisOperator& tx_operator() const noexcept { return tx_; }
  const AnalysisOperator& rx_operator() const noexcept { return rx_; }
  /// rx_dim x code_size matrix applied to the received code.
  const Matrix& post_matrix() const noexcept { return post_; }

  Index code_size() const noexcept { return tx_.size(); }
  Index anchor_count() const noexcept { return anchor_count_; }
  Index tx_dim() const noexcept { return tx_.dim(); }
  Index rx_dim() const noexcept { return post_.rows(); }

  /// Normalizes x to unit length, then applies the TX analysis operator.
  Vector pre_equalize(const Eigen::Ref<const Vector>& x) const;
  Vector post_equalize(const Eigen::Ref<const Vector>& code) const;

  /// Row-batched variants (one sample per row).
  Matrix pre_equalize_rows(const Eigen::Ref<const Matrix>& samples) const;
  Matrix post_equalize_rows(const Eigen::Ref<const Matrix>& codes) const;

 private:
  EqualizerMethod method_;
  AnalysisOperator tx_;
  AnalysisOperator rx_;
  Matrix post_;
  Index anchor_count_;
};

/// Parseval frame equalizer: both anchor sets whitened; c = F~ x, y = G~^T c.
EqualizerPair build_pfe(const Matrix& anchors_tx, const Matrix& anchors_rx);

/// Plain frame equalizer: raw unit-norm anchors at TX, Moore-Penrose
/// pseudoinverse of the RX anchors at RX.
EqualizerPair build_fe(const Matrix& anchors_tx, const Matrix& anchors_rx);

/// Supervised unitary Procrustes equalizer from paired pilots, truncated to
/// the leading `keep` singular directions of K^T H.
EqualizerPair build_upe(const Matrix& pilots_tx, const Matrix& pilots_rx, Index keep);

/// Dispatch on method; UPE keeps min(N, d, p) directions.
EqualizerPair build_equalizer(EqualizerMethod method, const Matrix& anchors_tx,
                              const Matrix& anchors_rx);

/// P = U V^T from the SVD of K^T H: the (semi-)orthogonal d x p matrix
/// minimizing ||H - K P||_F.
Matrix procrustes_alignment(const Matrix& pilots_tx, const Matrix& pilots_rx);

/// Moore-Penrose pseudoinverse with the frame-module rank cutoff.
Matrix pseudo_inverse(const Matrix& m);

/// Rows scaled to unit Euclidean norm; all-zero rows are left unchanged.
Matrix normalize_rows(Matrix m);

}  // namespace semeq
