#include "semeq/equalize.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace semeq {
namespace {

void check_bits(int bits) {
  if (bits < 1 || bits > kMaxBits) {
    throw InvalidInput("quantizer bits must lie in [1, 32], got " + std::to_string(bits));
  }
}

double level_count(int bits) { return std::ldexp(1.0, bits); }

// Assumes bits already validated.
double quantize_unchecked(double value, double step, double top_index) {
  const double v = std::clamp(value, -1.0, 1.0);
  // Nearest integer with ties resolved downwards.
  double i = std::ceil((v + 1.0) / step - 0.5);
  i = std::clamp(i, 0.0, top_index);
  return -1.0 + i * step;
}

}  // namespace

double quantizer_step(int bits) {
  check_bits(bits);
  return 2.0 / (level_count(bits) - 1.0);
}

double quantize_value(double value, int bits) {
  const double step = quantizer_step(bits);
  return quantize_unchecked(value, step, level_count(bits) - 1.0);
}

SemanticCode quantize(const SemanticCode& code, int bits) {
  SemanticCode out{code.coeffs, bits, code.source_user};
  const Index clamped = quantize_in_place(out.coeffs, bits);
  if (clamped > 0) {
    spdlog::warn("quantize: clamped {} coefficient(s) of user {} into [-1, 1]", clamped,
                 code.source_user);
  }
  return out;
}

Index quantize_in_place(Eigen::Ref<Matrix> coeffs, int bits) {
  const double step = quantizer_step(bits);
  const double top = level_count(bits) - 1.0;
  Index clamped = 0;
  for (Index j = 0; j < coeffs.cols(); ++j) {
    for (Index i = 0; i < coeffs.rows(); ++i) {
      double& c = coeffs(i, j);
      if (c < -1.0 || c > 1.0) ++clamped;
      c = quantize_unchecked(c, step, top);
    }
  }
  return clamped;
}

double compression_factor(Index coeffs, int bits, Index absolute_dim) {
  if (coeffs < 1 || bits < 1 || absolute_dim < 1) {
    throw InvalidInput("compression_factor expects positive arguments");
  }
  return static_cast<double>(coeffs) * bits / (static_cast<double>(absolute_dim) * 32.0);
}

}  // namespace semeq
