#pragma once

#include "semeq/equalize.hpp"
#include "semeq/rng.hpp"
#include "semeq/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace semeq {

struct WorldParams {
  Index tx_dim = 64;
  Index rx_dim = 64;
  Index classes = 10;
  Index samples = 1000;
  double cluster_spread = 0.1;  // per-coordinate std of the within-class offset
  double noise = 0.0;           // per-coordinate std of the RX-side mismatch
  double scale = 1.0;           // lambda in rx = lambda Q tx + noise
  std::uint64_t seed = 0;
  double validation_fraction = 0.2;
  /// When false the transform is the identity (requires tx_dim == rx_dim).
  bool random_rotation = true;
};

/// Descriptor of the map relating the two spaces. `external` worlds (ingested
/// from files) carry no ground truth.
struct WorldTransform {
  bool external = false;
  Matrix rotation;  // rx_dim x tx_dim, orthonormal columns or rows
  double scale = 1.0;
  double noise = 0.0;
};

/// Paired TX/RX embeddings of the same labelled samples.
struct LatentWorld {
  Matrix tx;  // n x d
  Matrix rx;  // n x p
  std::vector<int> labels;
  int classes = 0;
  WorldTransform transform;
  std::vector<Index> train;
  std::vector<Index> validation;

  Index size() const noexcept { return tx.rows(); }
  Index tx_dim() const noexcept { return tx.cols(); }
  Index rx_dim() const noexcept { return rx.cols(); }
};

/// Rows of `m` picked by `rows`, in order.
Matrix gather_rows(const Matrix& m, std::span<const Index> rows);

/// A random (semi-)orthogonal rows x cols matrix: orthonormal columns when
/// rows >= cols, orthonormal rows otherwise.
Matrix random_orthogonal(Index rows, Index cols, Rng& rng);

/// Synthetic world: T unit-norm Gaussian class centroids in R^d, samples are
/// normalized centroid + spread * N(0, I); RX side is normalize(lambda Q x +
/// noise * N(0, I)). Deterministic in `params.seed`.
LatentWorld generate_world(const WorldParams& params);

/// Seeded train/validation split; validation is never empty.
void assign_splits(LatentWorld& world, double validation_fraction, std::uint64_t seed);

// EMB1: "EMB1" magic, u32 LE count, u32 LE dim, count*dim f32 LE row-major.
void write_emb1(const std::filesystem::path& path, const Matrix& rows);
Matrix read_emb1(const std::filesystem::path& path);

/// Single-column CSV of integers (an optional non-numeric header is skipped).
void write_labels_csv(const std::filesystem::path& path, std::span<const int> labels);
std::vector<int> read_labels_csv(const std::filesystem::path& path);

LatentWorld ingest_embeddings(const std::filesystem::path& tx_path,
                              const std::filesystem::path& rx_path,
                              const std::filesystem::path& labels_path,
                              double validation_fraction = 0.2, std::uint64_t split_seed = 0);

/// Nearest-centroid classifier on unit-normalized class means.
class CentroidDecoder {
 public:
  explicit CentroidDecoder(Matrix centroids);

  Index classes() const noexcept { return centroids_.rows(); }
  Index dim() const noexcept { return centroids_.cols(); }
  const Matrix& centroids() const noexcept { return centroids_; }

  /// argmax_t <y, c_t>; ties go to the lowest class index.
  int predict(const Eigen::Ref<const Vector>& y) const;
  std::vector<int> predict_rows(const Eigen::Ref<const Matrix>& ys) const;

 private:
  Matrix centroids_;
};

enum class Split { train, validation };
enum class Side { tx, rx };

CentroidDecoder train_centroid_decoder(const LatentWorld& world, Split split = Split::train,
                                       Side side = Side::rx);

/// Decoder accuracy on the untouched RX validation vectors (no semantic
/// mismatch, no compression).
double absolute_accuracy(const LatentWorld& world, const CentroidDecoder& decoder);

/// Fraction of validation samples for which
/// decoder(post(quantize(pre(x), q))) equals the label.
double evaluate_accuracy(const LatentWorld& world, const CentroidDecoder& decoder,
                         const EqualizerPair& equalizer, Index coeffs, int bits);

/// Anchors for one (world, N): support chosen on the TX train embeddings,
/// both sides averaged over the same support sets.
struct AnchorPair {
  SupportSets support;
  Matrix tx;
  Matrix rx;
};
AnchorPair build_anchor_pair(const LatentWorld& world, const AnchorSpec& spec);

/// Per-user accuracy grid G[k][N][q].
class AccuracyTable {
 public:
  AccuracyTable() = default;
  AccuracyTable(std::size_t users, std::vector<Index> coeffs, std::vector<int> bits);

  std::size_t users() const noexcept { return users_; }
  const std::vector<Index>& coeffs() const noexcept { return coeffs_; }
  const std::vector<int>& bits() const noexcept { return bits_; }

  /// Throws InvalidInput when (n, q) is not on the grid.
  double at(std::size_t user, Index n, int q) const;
  double& at_index(std::size_t user, std::size_t n_idx, std::size_t q_idx);
  double at_index(std::size_t user, std::size_t n_idx, std::size_t q_idx) const;

  double max_for(std::size_t user) const;
  double min_for(std::size_t user) const;

  /// CSV with header user,N,q,accuracy (user is 0-based).
  void write_csv(const std::filesystem::path& path) const;
  static AccuracyTable read_csv(const std::filesystem::path& path);

 private:
  std::size_t index(std::size_t user, std::size_t n_idx, std::size_t q_idx) const;

  std::size_t users_ = 0;
  std::vector<Index> coeffs_;
  std::vector<int> bits_;
  std::vector<double> values_;
};

/// Evaluates every (user, N, q) cell; one equalizer per (user, N). When a
/// single decoder is given it is shared by all users. `anchors.count` is
/// overwritten per N; `anchors.seed` is mixed with the user index.
AccuracyTable build_accuracy_table(std::span<const LatentWorld> worlds,
                                   std::span<const CentroidDecoder> decoders,
                                   EqualizerMethod method, const AnchorSpec& anchors,
                                   std::span<const Index> coeffs, std::span<const int> bits);

}  // namespace semeq
