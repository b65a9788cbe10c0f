#include "semeq/latent_world.hpp"
#include "semeq/parallel.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>

namespace semeq {
namespace {

Matrix gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix m(rows, cols);
  // Fill row by row so the draw order matches the row-major sample layout.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = n01(rng);
  return m;
}

void validate(const WorldParams& p) {
  if (p.tx_dim < 1 || p.rx_dim < 1) throw InvalidInput("generate_world: dimensions must be >= 1");
  if (p.classes < 2) throw InvalidInput("generate_world: need at least two classes");
  if (p.samples < 10 * p.classes) {
    throw InvalidInput("generate_world: need at least 10 samples per class (" +
                       std::to_string(10 * p.classes) + "), got " + std::to_string(p.samples));
  }
  if (!(p.cluster_spread >= 0.0) || !(p.noise >= 0.0)) {
    throw InvalidInput("generate_world: spread and noise must be non-negative");
  }
  if (!p.random_rotation && p.tx_dim != p.rx_dim) {
    throw InvalidInput("generate_world: identity transform needs tx_dim == rx_dim");
  }
  if (!(p.scale > 0.0)) throw InvalidInput("generate_world: scale must be positive");
  if (!(p.validation_fraction > 0.0 && p.validation_fraction < 1.0)) {
    throw InvalidInput("generate_world: validation fraction must lie in (0, 1)");
  }
}

std::vector<double> accuracy_over_bits(const LatentWorld& world, const CentroidDecoder& decoder,
                                       const EqualizerPair& equalizer, std::span<const int> bits) {
  const Matrix samples = gather_rows(world.tx, world.validation);
  const Matrix codes = equalizer.pre_equalize_rows(samples);
  std::vector<double> out;
  out.reserve(bits.size());
  for (int q : bits) {
    Matrix quantized = codes;
    const Index clamped = quantize_in_place(quantized, q);
    if (clamped > 0) spdlog::warn("evaluate_accuracy: clamped {} coefficient(s)", clamped);
    const std::vector<int> predicted = decoder.predict_rows(equalizer.post_equalize_rows(quantized));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      if (predicted[i] == world.labels[static_cast<std::size_t>(world.validation[i])]) ++hits;
    }
    out.push_back(static_cast<double>(hits) / static_cast<double>(predicted.size()));
  }
  return out;
}

}  // namespace

Matrix gather_rows(const Matrix& m, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

Matrix random_orthogonal(Index rows, Index cols, Rng& rng) {
  if (rows < cols) return random_orthogonal(cols, rows, rng).transpose();
  const Matrix g = gaussian(rows, cols, rng);
  const Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  // Sign fix on diag(R) makes the distribution Haar.
  const Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Index j = 0; j < cols; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

void assign_splits(LatentWorld& world, double validation_fraction, std::uint64_t seed) {
  const Index n = world.size();
  if (n < 2) throw InvalidInput("need at least two samples to split");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng = make_rng(seed, Stream::split);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_val = static_cast<Index>(std::llround(validation_fraction * static_cast<double>(n)));
  n_val = std::clamp<Index>(n_val, 1, n - 1);
  world.validation.assign(order.begin(), order.begin() + n_val);
  world.train.assign(order.begin() + n_val, order.end());
  std::sort(world.validation.begin(), world.validation.end());
  std::sort(world.train.begin(), world.train.end());
}

LatentWorld generate_world(const WorldParams& p) {
  validate(p);
  LatentWorld w;
  w.classes = static_cast<int>(p.classes);

  Rng content = make_rng(p.seed, Stream::world, 0);
  const Matrix centroids = normalize_rows(gaussian(p.classes, p.tx_dim, content));

  w.labels.resize(static_cast<std::size_t>(p.samples));
  for (Index i = 0; i < p.samples; ++i) w.labels[static_cast<std::size_t>(i)] = static_cast<int>(i % p.classes);
  std::shuffle(w.labels.begin(), w.labels.end(), content);

  w.tx = gaussian(p.samples, p.tx_dim, content) * p.cluster_spread;
  for (Index i = 0; i < p.samples; ++i) w.tx.row(i) += centroids.row(w.labels[static_cast<std::size_t>(i)]);
  w.tx = normalize_rows(std::move(w.tx));

  Rng transform = make_rng(p.seed, Stream::transform);
  w.transform.scale = p.scale;
  w.transform.noise = p.noise;
  w.transform.rotation = p.random_rotation ? random_orthogonal(p.rx_dim, p.tx_dim, transform)
                                           : Matrix::Identity(p.rx_dim, p.tx_dim);

  Rng noise = make_rng(p.seed, Stream::world, 1);
  w.rx = p.scale * (w.tx * w.transform.rotation.transpose());
  if (p.noise > 0.0) w.rx += p.noise * gaussian(p.samples, p.rx_dim, noise);
  w.rx = normalize_rows(std::move(w.rx));

  assign_splits(w, p.validation_fraction, p.seed);
  return w;
}

CentroidDecoder::CentroidDecoder(Matrix centroids) : centroids_(normalize_rows(std::move(centroids))) {
  if (centroids_.rows() < 1 || centroids_.cols() < 1) throw InvalidInput("decoder needs centroids");
}

int CentroidDecoder::predict(const Eigen::Ref<const Vector>& y) const {
  if (y.size() != dim()) {
    throw DimensionMismatch("decoder expects dim " + std::to_string(dim()) + ", got " +
                            std::to_string(y.size()));
  }
  const Vector scores = centroids_ * y;
  int best = 0;
  for (Index t = 1; t < scores.size(); ++t) {
    if (scores(t) > scores(best)) best = static_cast<int>(t);
  }
  return best;
}

std::vector<int> CentroidDecoder::predict_rows(const Eigen::Ref<const Matrix>& ys) const {
  if (ys.cols() != dim()) {
    throw DimensionMismatch("decoder expects dim " + std::to_string(dim()) + ", got " +
                            std::to_string(ys.cols()));
  }
  const Matrix scores = ys * centroids_.transpose();
  std::vector<int> out(static_cast<std::size_t>(ys.rows()));
  for (Index i = 0; i < scores.rows(); ++i) {
    Index best = 0;
    for (Index t = 1; t < scores.cols(); ++t) {
      if (scores(i, t) > scores(i, best)) best = t;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

CentroidDecoder train_centroid_decoder(const LatentWorld& world, Split split, Side side) {
  const auto& rows = split == Split::train ? world.train : world.validation;
  const Matrix& data = side == Side::rx ? world.rx : world.tx;
  if (rows.empty()) throw InvalidInput("train_centroid_decoder: empty split");
  Matrix sums = Matrix::Zero(world.classes, data.cols());
  std::vector<Index> counts(static_cast<std::size_t>(world.classes), 0);
  for (Index i : rows) {
    const int label = world.labels[static_cast<std::size_t>(i)];
    sums.row(label) += data.row(i);
    ++counts[static_cast<std::size_t>(label)];
  }
  for (int t = 0; t < world.classes; ++t) {
    if (counts[static_cast<std::size_t>(t)] == 0) {
      throw InvalidInput("train_centroid_decoder: class " + std::to_string(t) +
                         " has no samples in the split");
    }
  }
  return CentroidDecoder(std::move(sums));
}

double absolute_accuracy(const LatentWorld& world, const CentroidDecoder& decoder) {
  const std::vector<int> predicted = decoder.predict_rows(gather_rows(world.rx, world.validation));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == world.labels[static_cast<std::size_t>(world.validation[i])]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double evaluate_accuracy(const LatentWorld& world, const CentroidDecoder& decoder,
                         const EqualizerPair& equalizer, Index coeffs, int bits) {
  if (coeffs != equalizer.anchor_count()) {
    throw InvalidInput("evaluate_accuracy: N=" + std::to_string(coeffs) +
                       " but the equalizer was built with " +
                       std::to_string(equalizer.anchor_count()) + " anchors");
  }
  const int q[] = {bits};
  return accuracy_over_bits(world, decoder, equalizer, q).front();
}

AnchorPair build_anchor_pair(const LatentWorld& world, const AnchorSpec& spec) {
  const Matrix train_tx = gather_rows(world.tx, world.train);
  AnchorSelection selection = select_anchors(train_tx, spec);
  AnchorPair out;
  out.support = std::move(selection.support);
  for (auto& set : out.support) {
    for (Index& i : set) i = world.train[static_cast<std::size_t>(i)];
  }
  out.tx = std::move(selection.anchors);
  out.rx = anchors_from_support(world.rx, out.support);
  return out;
}

AccuracyTable::AccuracyTable(std::size_t users, std::vector<Index> coeffs, std::vector<int> bits)
    : users_(users), coeffs_(std::move(coeffs)), bits_(std::move(bits)) {
  if (users_ == 0 || coeffs_.empty() || bits_.empty()) {
    throw InvalidInput("accuracy table needs at least one user, N and q");
  }
  if (!std::is_sorted(coeffs_.begin(), coeffs_.end()) || !std::is_sorted(bits_.begin(), bits_.end())) {
    throw InvalidInput("accuracy table grids must be sorted ascending");
  }
  values_.assign(users_ * coeffs_.size() * bits_.size(), 0.0);
}

std::size_t AccuracyTable::index(std::size_t user, std::size_t n_idx, std::size_t q_idx) const {
  if (user >= users_ || n_idx >= coeffs_.size() || q_idx >= bits_.size()) {
    throw InvalidInput("accuracy table index out of range");
  }
  return (user * coeffs_.size() + n_idx) * bits_.size() + q_idx;
}

double& AccuracyTable::at_index(std::size_t user, std::size_t n_idx, std::size_t q_idx) {
  return values_[index(user, n_idx, q_idx)];
}

double AccuracyTable::at_index(std::size_t user, std::size_t n_idx, std::size_t q_idx) const {
  return values_[index(user, n_idx, q_idx)];
}

double AccuracyTable::at(std::size_t user, Index n, int q) const {
  const auto ni = std::find(coeffs_.begin(), coeffs_.end(), n);
  const auto qi = std::find(bits_.begin(), bits_.end(), q);
  if (ni == coeffs_.end() || qi == bits_.end()) {
    throw InvalidInput("accuracy table has no entry for N=" + std::to_string(n) +
                       ", q=" + std::to_string(q));
  }
  return at_index(user, static_cast<std::size_t>(ni - coeffs_.begin()),
                  static_cast<std::size_t>(qi - bits_.begin()));
}

double AccuracyTable::max_for(std::size_t user) const {
  const auto begin = values_.begin() + static_cast<std::ptrdiff_t>(index(user, 0, 0));
  return *std::max_element(begin, begin + static_cast<std::ptrdiff_t>(coeffs_.size() * bits_.size()));
}

double AccuracyTable::min_for(std::size_t user) const {
  const auto begin = values_.begin() + static_cast<std::ptrdiff_t>(index(user, 0, 0));
  return *std::min_element(begin, begin + static_cast<std::ptrdiff_t>(coeffs_.size() * bits_.size()));
}

void AccuracyTable::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << "user,N,q,accuracy\n";
  char buf[64];
  for (std::size_t k = 0; k < users_; ++k)
    for (std::size_t n = 0; n < coeffs_.size(); ++n)
      for (std::size_t q = 0; q < bits_.size(); ++q) {
        std::snprintf(buf, sizeof buf, "%.17g", at_index(k, n, q));
        out << k << ',' << coeffs_[n] << ',' << bits_[q] << ',' << buf << '\n';
      }
}

AccuracyTable AccuracyTable::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("user,N,q,accuracy", 0) != 0) {
    throw FormatError("accuracy table '" + path.string() + "': missing header user,N,q,accuracy");
  }
  struct Row { std::size_t user; Index n; int q; double acc; };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Row r{};
    if (std::sscanf(line.c_str(), "%zu,%ld,%d,%lf", &r.user, &r.n, &r.q, &r.acc) != 4) {
      throw FormatError("accuracy table '" + path.string() + "' line " + std::to_string(line_no) +
                        ": malformed row");
    }
    if (!(r.acc >= 0.0 && r.acc <= 1.0)) {
      throw FormatError("accuracy table line " + std::to_string(line_no) + ": accuracy outside [0,1]");
    }
    rows.push_back(r);
  }
  std::set<std::size_t> users;
  std::set<Index> ns;
  std::set<int> qs;
  for (const Row& r : rows) {
    users.insert(r.user);
    ns.insert(r.n);
    qs.insert(r.q);
  }
  if (rows.empty() || *users.rbegin() + 1 != users.size()) {
    throw FormatError("accuracy table '" + path.string() + "': users must be 0..K-1");
  }
  AccuracyTable t(users.size(), {ns.begin(), ns.end()}, {qs.begin(), qs.end()});
  if (rows.size() != users.size() * ns.size() * qs.size()) {
    throw FormatError("accuracy table '" + path.string() + "': grid incomplete, expected " +
                      std::to_string(users.size() * ns.size() * qs.size()) + " rows, got " +
                      std::to_string(rows.size()));
  }
  for (const Row& r : rows) {
    t.at_index(r.user, static_cast<std::size_t>(std::distance(ns.begin(), ns.find(r.n))),
               static_cast<std::size_t>(std::distance(qs.begin(), qs.find(r.q)))) = r.acc;
  }
  return t;
}

AccuracyTable build_accuracy_table(std::span<const LatentWorld> worlds,
                                   std::span<const CentroidDecoder> decoders,
                                   EqualizerMethod method, const AnchorSpec& anchors,
                                   std::span<const Index> coeffs, std::span<const int> bits) {
  if (worlds.empty()) throw InvalidInput("build_accuracy_table: no worlds");
  if (decoders.size() != 1 && decoders.size() != worlds.size()) {
    throw InvalidInput("build_accuracy_table: need one shared decoder or one per user");
  }
  AccuracyTable table(worlds.size(), {coeffs.begin(), coeffs.end()}, {bits.begin(), bits.end()});
  const std::size_t cells = worlds.size() * coeffs.size();
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t user = cell / coeffs.size();
    const std::size_t n_idx = cell % coeffs.size();
    AnchorSpec spec = anchors;
    spec.count = coeffs[n_idx];
    spec.seed = derive_seed(anchors.seed, Stream::anchors, user);
    const LatentWorld& world = worlds[user];
    const CentroidDecoder& decoder = decoders.size() == 1 ? decoders[0] : decoders[user];
    const AnchorPair pair = build_anchor_pair(world, spec);
    const EqualizerPair eq = build_equalizer(method, pair.tx, pair.rx);
    const std::vector<double> acc = accuracy_over_bits(world, decoder, eq, bits);
    for (std::size_t q_idx = 0; q_idx < bits.size(); ++q_idx) table.at_index(user, n_idx, q_idx) = acc[q_idx];
  });
  return table;
}

}  // namespace semeq
