#pragma once

#include "semeq/lyapunov.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace semeq {

/// Trace CSV: t, Z, Q_k, L, L_r, L_tx_k, G_k, p_total, p_r, p_u_k, p_c_k,
/// N_k, q_k, f_k, B_k, R_k, f_r, h2_k, L_c_k, L_u_k, cost. Queues are the
/// pre-decision values. Doubles are printed with 17 significant digits.
void write_trace_csv(std::ostream& out, std::span<const SlotRecord> records);
void write_trace_csv(const std::filesystem::path& path, std::span<const SlotRecord> records);
std::string trace_csv(std::span<const SlotRecord> records);

/// Post-update queues are recomputed from `params` (step sizes and targets).
std::vector<SlotRecord> parse_trace_csv(std::istream& in, const QueueState& params);
std::vector<SlotRecord> read_trace_csv(const std::filesystem::path& path, const QueueState& params);

}  // namespace semeq
