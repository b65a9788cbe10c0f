#include "oracles.hpp"
#include "scratch_dir.hpp"

#include "semeq/latent_world.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

using namespace semeq;

namespace {

WorldParams small_params(std::uint64_t seed) {
  WorldParams p;
  p.tx_dim = 16;
  p.rx_dim = 16;
  p.classes = 5;
  p.samples = 200;
  p.cluster_spread = 0.1;
  p.seed = seed;
  return p;
}

}  // namespace

TEST(World, IdentityWorldHasIdenticalSides) {
  WorldParams p = small_params(3);
  p.random_rotation = false;
  const LatentWorld w = generate_world(p);
  EXPECT_LE(oracle::max_abs(w.tx - w.rx), 1e-15);
}

TEST(World, RotationPreservesGram) {
  WorldParams p = small_params(4);
  p.rx_dim = 24;
  const LatentWorld w = generate_world(p);
  const Matrix gx = w.tx * w.tx.transpose();
  const Matrix gy = w.rx * w.rx.transpose();
  EXPECT_LE(oracle::max_abs(gx - gy), 1e-9);
  EXPECT_LE(oracle::max_abs(w.rx - w.tx * w.transform.rotation.transpose()), 1e-12);
}

TEST(World, SameSeedBitwiseIdentical) {
  const LatentWorld a = generate_world(small_params(9));
  const LatentWorld b = generate_world(small_params(9));
  EXPECT_EQ(a.tx, b.tx);
  EXPECT_EQ(a.rx, b.rx);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.validation, b.validation);
  const LatentWorld c = generate_world(small_params(10));
  EXPECT_NE(a.tx, c.tx);
}

TEST(World, StructuralInvariants) {
  WorldParams p = small_params(5);
  p.noise = 0.05;
  const LatentWorld w = generate_world(p);
  EXPECT_EQ(w.size(), 200);
  EXPECT_FALSE(w.validation.empty());
  EXPECT_EQ(w.train.size() + w.validation.size(), 200u);
  for (int l : w.labels) {
    EXPECT_GE(l, 0);
    EXPECT_LT(l, 5);
  }
  for (Index i = 0; i < w.size(); ++i) {
    EXPECT_NEAR(w.tx.row(i).norm(), 1.0, 1e-12);
    EXPECT_NEAR(w.rx.row(i).norm(), 1.0, 1e-12);
  }
  // The RX mismatch is small relative to the unit signal at this noise level.
  const double mismatch = (w.rx - w.tx * w.transform.rotation.transpose()).rowwise().norm().mean();
  EXPECT_GT(mismatch, 0.0);
  EXPECT_LT(mismatch, 0.05 * std::sqrt(16.0) * 1.5);
}

TEST(World, InvalidParamsRejected) {
  WorldParams p = small_params(1);
  p.random_rotation = false;
  p.rx_dim = 8;
  EXPECT_THROW(generate_world(p), InvalidInput);
  p = small_params(1);
  p.samples = 20;
  EXPECT_THROW(generate_world(p), InvalidInput);
  p = small_params(1);
  p.validation_fraction = 1.0;
  EXPECT_THROW(generate_world(p), InvalidInput);
}

TEST(World, RandomOrthogonalShapes) {
  Rng rng = make_rng(1, Stream::test);
  const Matrix tall = random_orthogonal(10, 4, rng);
  EXPECT_LE(oracle::max_abs(tall.transpose() * tall - Matrix::Identity(4, 4)), 1e-12);
  const Matrix wide = random_orthogonal(4, 10, rng);
  EXPECT_LE(oracle::max_abs(wide * wide.transpose() - Matrix::Identity(4, 4)), 1e-12);
}

TEST(World, SplitsAlwaysNonEmpty) {
  LatentWorld w;
  w.tx = Matrix::Zero(3, 1);
  assign_splits(w, 0.01, 0);
  EXPECT_EQ(w.validation.size(), 1u);
  assign_splits(w, 0.99, 0);
  EXPECT_EQ(w.train.size(), 1u);
}

// EMB1 ----------------------------------------------------------------------

TEST(Emb1, RoundTripIsLossless) {
  ScratchDir dir("emb1");
  Rng rng = make_rng(2, Stream::test);
  const Matrix m = oracle::gaussian(17, 5, rng).cast<float>().cast<double>();
  write_emb1(dir / "a.emb1", m);
  EXPECT_EQ(read_emb1(dir / "a.emb1"), m);
}

TEST(Emb1, HeaderLayout) {
  ScratchDir dir("emb1h");
  Matrix m(1, 2);
  m << 1.0, -2.0;
  write_emb1(dir / "h.emb1", m);
  std::ifstream in(dir / "h.emb1", std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ASSERT_EQ(bytes.size(), 20u);
  EXPECT_EQ(bytes.substr(0, 4), "EMB1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);
  // 1.0f = 0x3F800000 little-endian.
  EXPECT_EQ(static_cast<unsigned char>(bytes[15]), 0x3F);
  EXPECT_EQ(static_cast<unsigned char>(bytes[14]), 0x80);
}

TEST(Emb1, TruncatedFileNamesLengths) {
  ScratchDir dir("emb1t");
  write_emb1(dir / "t.emb1", Matrix::Ones(4, 3));
  std::filesystem::resize_file(dir / "t.emb1", 12 + 4 * 12 - 5);
  try {
    read_emb1(dir / "t.emb1");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("expected 60"), std::string::npos) << msg;
    EXPECT_NE(msg.find("got 55"), std::string::npos) << msg;
  }
}

TEST(Emb1, BadMagicRejected) {
  ScratchDir dir("emb1m");
  std::ofstream(dir / "bad.emb1", std::ios::binary) << "EMB2xxxxxxxxxxxx";
  EXPECT_THROW(read_emb1(dir / "bad.emb1"), FormatError);
}

TEST(Emb1, IngestChecksCounts) {
  ScratchDir dir("ingest");
  write_emb1(dir / "tx.emb1", Matrix::Ones(10, 3));
  write_emb1(dir / "rx.emb1", Matrix::Ones(9, 3));
  const std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  write_labels_csv(dir / "labels.csv", labels);
  try {
    ingest_embeddings(dir / "tx.emb1", dir / "rx.emb1", dir / "labels.csv");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("count mismatch"), std::string::npos);
  }
  write_emb1(dir / "rx.emb1", Matrix::Ones(10, 4));
  const LatentWorld w = ingest_embeddings(dir / "tx.emb1", dir / "rx.emb1", dir / "labels.csv");
  EXPECT_TRUE(w.transform.external);
  EXPECT_EQ(w.classes, 2);
  EXPECT_EQ(w.rx_dim(), 4);
  EXPECT_EQ(read_labels_csv(dir / "labels.csv"), labels);
}

// Decoder and accuracy ------------------------------------------------------

TEST(Decoder, OneSamplePerClass) {
  Rng rng = make_rng(3, Stream::test);
  const Matrix c = oracle::gaussian(6, 10, rng);
  const CentroidDecoder dec(c);
  for (Index t = 0; t < 6; ++t) EXPECT_EQ(dec.predict(c.row(t).transpose()), t);
}

TEST(Decoder, AntipodalAndTies) {
  Matrix c(2, 2);
  c << 1, 0, -1, 0;
  const CentroidDecoder dec(c);
  EXPECT_EQ(dec.predict(Vector::Unit(2, 0)), 0);
  EXPECT_EQ(dec.predict(-Vector::Unit(2, 0)), 1);
  EXPECT_EQ(dec.predict(Vector::Unit(2, 1)), 0);  // tie
}

TEST(Decoder, MissingClassRejected) {
  LatentWorld w = generate_world(small_params(2));
  w.classes = 6;
  EXPECT_THROW(train_centroid_decoder(w), InvalidInput);
}

TEST(Decoder, SeparableWorldBaseline) {
  WorldParams p;
  p.tx_dim = 32;
  p.rx_dim = 32;
  p.classes = 10;
  p.samples = 2000;
  p.cluster_spread = 0.05;
  p.seed = 11;
  const LatentWorld w = generate_world(p);
  EXPECT_GE(absolute_accuracy(w, train_centroid_decoder(w)), 0.99);
}

TEST(Accuracy, IdentityWorldMatchesBaseline) {
  WorldParams p = small_params(6);
  p.random_rotation = false;
  p.cluster_spread = 0.3;
  const LatentWorld w = generate_world(p);
  const CentroidDecoder dec = train_centroid_decoder(w);
  const AnchorPair a = build_anchor_pair(w, AnchorSpec{AnchorStrategy::prototypical, 32, 3, 1});
  const EqualizerPair eq = build_pfe(a.tx, a.rx);
  EXPECT_DOUBLE_EQ(evaluate_accuracy(w, dec, eq, 32, 32), absolute_accuracy(w, dec));
  EXPECT_THROW(evaluate_accuracy(w, dec, eq, 16, 32), InvalidInput);
}

TEST(Accuracy, RandomDecoderIsChance) {
  WorldParams p;
  p.tx_dim = 16;
  p.rx_dim = 16;
  p.classes = 10;
  p.samples = 5000;
  p.validation_fraction = 0.8;
  p.seed = 12;
  const LatentWorld w = generate_world(p);
  Rng rng = make_rng(4, Stream::test);
  const CentroidDecoder random_dec(oracle::gaussian(10, 16, rng));
  const AnchorPair a = build_anchor_pair(w, AnchorSpec{AnchorStrategy::prototypical, 32, 4, 2});
  const double g = evaluate_accuracy(w, random_dec, build_pfe(a.tx, a.rx), 32, 32);
  // Random centroids partition the sphere unevenly, so allow a wide band
  // around 1/T; a decoder that had learned anything would sit far above it.
  const double n = static_cast<double>(w.validation.size());
  const double sigma = std::sqrt(0.1 * 0.9 / n);
  EXPECT_LT(std::abs(g - 0.1), 0.1 + 3 * sigma);
  EXPECT_LT(g, 0.35);
}

TEST(Accuracy, CoarseBitsNoBetterThanFine) {
  WorldParams p;
  p.tx_dim = 32;
  p.rx_dim = 48;
  p.classes = 20;
  p.samples = 2000;
  p.cluster_spread = 0.25;
  p.noise = 0.05;
  p.seed = 13;
  const LatentWorld w = generate_world(p);
  const CentroidDecoder dec = train_centroid_decoder(w);
  const AnchorPair a = build_anchor_pair(w, AnchorSpec{AnchorStrategy::prototypical, 64, 4, 3});
  const EqualizerPair eq = build_pfe(a.tx, a.rx);
  EXPECT_LE(evaluate_accuracy(w, dec, eq, 64, 2), evaluate_accuracy(w, dec, eq, 64, 32) + 0.02);
}

TEST(Accuracy, AnchorPairSharesSupport) {
  const LatentWorld w = generate_world(small_params(7));
  const AnchorPair a = build_anchor_pair(w, AnchorSpec{AnchorStrategy::prototypical, 8, 3, 4});
  EXPECT_LE(oracle::max_abs(a.rx - anchors_from_support(w.rx, a.support)), 0.0);
  EXPECT_LE(oracle::max_abs(a.tx - anchors_from_support(w.tx, a.support)), 1e-15);
  std::set<Index> train(w.train.begin(), w.train.end());
  for (const auto& set : a.support)
    for (Index i : set) EXPECT_TRUE(train.count(i));
}

// Accuracy table --------------------------------------------------------------

TEST(Table, ShapeRangeAndDeterminism) {
  const std::vector<LatentWorld> worlds{generate_world(small_params(8))};
  const std::vector<CentroidDecoder> decs{train_centroid_decoder(worlds[0])};
  const std::vector<Index> n{8, 16};
  const std::vector<int> q{2, 32};
  const AnchorSpec spec{AnchorStrategy::prototypical, 1, 3, 5};
  const AccuracyTable t = build_accuracy_table(worlds, decs, EqualizerMethod::pfe, spec, n, q);
  EXPECT_EQ(t.users(), 1u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_GE(t.at_index(0, i, j), 0.0);
      EXPECT_LE(t.at_index(0, i, j), 1.0);
    }
  EXPECT_GE(t.max_for(0), t.min_for(0));
  EXPECT_GE(t.at(0, 16, 32), t.at(0, 8, 2) - 0.02);
  const AccuracyTable again = build_accuracy_table(worlds, decs, EqualizerMethod::pfe, spec, n, q);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(t.at_index(0, i, j), again.at_index(0, i, j));
  EXPECT_THROW(t.at(0, 12, 2), InvalidInput);
}

TEST(Table, CsvRoundTrip) {
  ScratchDir dir("table");
  AccuracyTable t(2, {4, 8}, {2, 4, 8});
  double v = 0.1;
  for (std::size_t u = 0; u < 2; ++u)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j) t.at_index(u, i, j) = (v += 0.0371);
  t.write_csv(dir / "t.csv");
  const AccuracyTable r = AccuracyTable::read_csv(dir / "t.csv");
  EXPECT_EQ(r.coeffs(), t.coeffs());
  EXPECT_EQ(r.bits(), t.bits());
  for (std::size_t u = 0; u < 2; ++u)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(r.at_index(u, i, j), t.at_index(u, i, j));
}

TEST(Table, UnsortedGridRejected) {
  EXPECT_THROW(AccuracyTable(1, {8, 4}, {2}), InvalidInput);
  EXPECT_THROW(AccuracyTable(0, {4}, {2}), InvalidInput);
}
