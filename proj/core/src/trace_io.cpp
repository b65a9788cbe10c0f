#include "semeq/trace_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace semeq {
namespace {

void put(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, ",%.17g", v);
  out << buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double to_double(const std::string& s, std::size_t line, std::size_t col) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw FormatError("trace line " + std::to_string(line) + " column " + std::to_string(col + 1) +
                      ": not a number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_trace_csv(std::ostream& out, std::span<const SlotRecord> records) {
  const std::size_t k = records.empty() ? 0 : records.front().decision.size();
  out << "t,Z";
  const auto group = [&](const char* name) {
    for (std::size_t i = 0; i < k; ++i) out << ',' << name << '_' << i + 1;
  };
  group("Q");
  out << ",L,L_r";
  group("L_tx");
  group("G");
  out << ",p_total,p_r";
  group("p_u");
  group("p_c");
  group("N");
  group("q");
  group("f");
  group("B");
  group("R");
  out << ",f_r";
  group("h2");
  group("L_c");
  group("L_u");
  out << ",cost\n";

  for (const SlotRecord& r : records) {
    if (r.decision.size() != k) throw DimensionMismatch("write_trace_csv: user count changes mid-trace");
    out << r.t;
    put(out, r.before.Z);
    for (double q : r.before.Q) put(out, q);
    put(out, r.metrics.latency);
    put(out, r.metrics.server_latency);
    for (double v : r.metrics.tx_latency) put(out, v);
    for (double v : r.accuracy) put(out, v);
    put(out, r.metrics.power);
    put(out, r.metrics.server_power);
    for (double v : r.metrics.uplink_power) put(out, v);
    for (double v : r.metrics.compute_power) put(out, v);
    for (const UserDecision& d : r.decision.users) out << ',' << d.coeffs;
    for (const UserDecision& d : r.decision.users) out << ',' << d.bits;
    for (const UserDecision& d : r.decision.users) put(out, d.cpu_freq);
    for (const UserDecision& d : r.decision.users) put(out, d.bandwidth);
    for (const UserDecision& d : r.decision.users) put(out, d.rate);
    put(out, r.decision.server_freq);
    for (double v : r.channel.gain) put(out, v);
    for (double v : r.metrics.compute_latency) put(out, v);
    for (double v : r.metrics.uplink_latency) put(out, v);
    put(out, r.cost);
    out << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, std::span<const SlotRecord> records) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw FormatError("cannot write trace '" + path.string() + "'");
  write_trace_csv(out, records);
}

std::string trace_csv(std::span<const SlotRecord> records) {
  std::ostringstream out;
  write_trace_csv(out, records);
  return out.str();
}

std::vector<SlotRecord> parse_trace_csv(std::istream& in, const QueueState& params) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("trace: empty input");
  const std::vector<std::string> header = split(line);
  std::size_t k = 0;
  while (2 + k < header.size() && header[2 + k].rfind("Q_", 0) == 0) ++k;
  const std::size_t expected = 2 + k + 2 + k + k + 2 + k + k + 5 * k + 1 + k + k + k + 1;
  if (header.size() != expected || header[0] != "t" || header[1] != "Z") {
    throw FormatError("trace: header has " + std::to_string(header.size()) + " columns, expected " +
                      std::to_string(expected) + " for " + std::to_string(k) + " users");
  }
  if (params.Q.size() != k) {
    throw DimensionMismatch("trace has " + std::to_string(k) + " users, queue parameters have " +
                            std::to_string(params.Q.size()));
  }

  std::vector<SlotRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line);
    if (f.size() != expected) {
      throw FormatError("trace line " + std::to_string(line_no) + ": " + std::to_string(f.size()) +
                        " fields, expected " + std::to_string(expected));
    }
    std::size_t c = 0;
    const auto next = [&] { const double v = to_double(f[c], line_no, c); ++c; return v; };
    const auto many = [&](std::vector<double>& v) {
      v.resize(k);
      for (double& x : v) x = next();
    };
    SlotRecord r;
    r.t = static_cast<std::int64_t>(next());
    r.before = params;
    r.before.Z = next();
    many(r.before.Q);
    r.metrics.latency = next();
    r.metrics.server_latency = next();
    many(r.metrics.tx_latency);
    many(r.accuracy);
    r.metrics.power = next();
    r.metrics.server_power = next();
    many(r.metrics.uplink_power);
    many(r.metrics.compute_power);
    r.decision.users.resize(k);
    for (UserDecision& d : r.decision.users) d.coeffs = static_cast<Index>(next());
    for (UserDecision& d : r.decision.users) d.bits = static_cast<int>(next());
    for (UserDecision& d : r.decision.users) d.cpu_freq = next();
    for (UserDecision& d : r.decision.users) d.bandwidth = next();
    for (UserDecision& d : r.decision.users) d.rate = next();
    r.decision.server_freq = next();
    many(r.channel.gain);
    many(r.metrics.compute_latency);
    many(r.metrics.uplink_latency);
    r.cost = next();
    r.after = update_queues(r.before, r.metrics.latency, r.accuracy);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<SlotRecord> read_trace_csv(const std::filesystem::path& path, const QueueState& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open trace '" + path.string() + "'");
  return parse_trace_csv(in, params);
}

}  // namespace semeq
