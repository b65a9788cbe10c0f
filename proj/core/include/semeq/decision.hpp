#pragma once

#include "semeq/types.hpp"

#include <vector>

namespace semeq {

/// One user's control variables for a slot.
struct UserDecision {
  Index coeffs = 0;        // N
  int bits = 0;            // q
  double cpu_freq = 0.0;   // f^c, Hz
  double bandwidth = 0.0;  // B, Hz
  double rate = 0.0;       // R, bit/s
};

/// Psi(t): every user's decision plus the server CPU frequency.
struct SlotDecision {
  std::vector<UserDecision> users;
  double server_freq = 0.0;

  std::size_t size() const noexcept { return users.size(); }
};

}  // namespace semeq
