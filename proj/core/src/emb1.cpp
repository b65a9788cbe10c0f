#include "semeq/latent_world.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>

namespace semeq {
namespace {

constexpr std::array<char, 4> kMagic{'E', 'M', 'B', '1'};
constexpr std::size_t kHeaderBytes = 12;

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFU));
}

std::uint32_t get_u32(const std::string& in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + b])) << (8 * b);
  }
  return v;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

void write_emb1(const std::filesystem::path& path, const Matrix& rows) {
  if (rows.rows() > UINT32_MAX || rows.cols() > UINT32_MAX) {
    throw InvalidInput("EMB1: matrix too large");
  }
  std::string buf(kMagic.begin(), kMagic.end());
  buf.reserve(kHeaderBytes + 4 * static_cast<std::size_t>(rows.size()));
  put_u32(buf, static_cast<std::uint32_t>(rows.rows()));
  put_u32(buf, static_cast<std::uint32_t>(rows.cols()));
  for (Index i = 0; i < rows.rows(); ++i) {
    for (Index j = 0; j < rows.cols(); ++j) {
      put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(rows(i, j))));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FormatError("short write to '" + path.string() + "'");
}

Matrix read_emb1(const std::filesystem::path& path) {
  const std::string buf = slurp(path);
  const std::string where = "EMB1 '" + path.string() + "': ";
  if (buf.size() < kHeaderBytes) {
    throw FormatError(where + "header: expected at least 12 bytes, got " +
                      std::to_string(buf.size()));
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), buf.begin())) {
    throw FormatError(where + "magic: expected \"EMB1\", got \"" + buf.substr(0, 4) + "\"");
  }
  const std::uint32_t count = get_u32(buf, 4);
  const std::uint32_t dim = get_u32(buf, 8);
  if (count == 0 || dim == 0) {
    throw FormatError(where + "count/dim: expected positive values, got count=" +
                      std::to_string(count) + " dim=" + std::to_string(dim));
  }
  const std::size_t expected = kHeaderBytes + 4ULL * count * dim;
  if (buf.size() != expected) {
    throw FormatError(where + "length: expected " + std::to_string(expected) + " bytes, got " +
                      std::to_string(buf.size()));
  }
  Matrix m(static_cast<Index>(count), static_cast<Index>(dim));
  std::size_t offset = kHeaderBytes;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j, offset += 4) {
      const float v = std::bit_cast<float>(get_u32(buf, offset));
      if (!std::isfinite(v)) {
        throw FormatError(where + "value at row " + std::to_string(i) + ", col " +
                          std::to_string(j) + " is not finite");
      }
      m(i, j) = static_cast<double>(v);
    }
  }
  return m;
}

void write_labels_csv(const std::filesystem::path& path, std::span<const int> labels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << "label\n";
  for (int l : labels) out << l << '\n';
}

std::vector<int> read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      if (line_no == 1) continue;  // header
      throw FormatError("labels '" + path.string() + "' line " + std::to_string(line_no) +
                        ": not an integer: '" + line + "'");
    }
    if (v < 0) {
      throw FormatError("labels '" + path.string() + "' line " + std::to_string(line_no) +
                        ": negative label");
    }
    labels.push_back(v);
  }
  return labels;
}

LatentWorld ingest_embeddings(const std::filesystem::path& tx_path,
                              const std::filesystem::path& rx_path,
                              const std::filesystem::path& labels_path,
                              double validation_fraction, std::uint64_t split_seed) {
  LatentWorld world;
  world.tx = read_emb1(tx_path);
  world.rx = read_emb1(rx_path);
  world.labels = read_labels_csv(labels_path);
  if (world.tx.rows() != world.rx.rows()) {
    throw FormatError("count mismatch: TX has " + std::to_string(world.tx.rows()) +
                      " samples, RX has " + std::to_string(world.rx.rows()));
  }
  if (static_cast<Index>(world.labels.size()) != world.tx.rows()) {
    throw FormatError("count mismatch: " + std::to_string(world.labels.size()) + " labels for " +
                      std::to_string(world.tx.rows()) + " samples");
  }
  world.classes = 1 + *std::max_element(world.labels.begin(), world.labels.end());
  world.transform.external = true;
  assign_splits(world, validation_fraction, split_seed);
  return world;
}

}  // namespace semeq
