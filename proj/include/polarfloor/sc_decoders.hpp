#pragma once

#include "polarfloor/channel.hpp"
#include "polarfloor/polar_code.hpp"
#include "polarfloor/types.hpp"

namespace polarfloor {

enum class PathMetric { exact, hardware_approx };

struct SclConfig {
  int list_size = 1;
  PathMetric path_metric = PathMetric::exact;
};

/// Successive cancellation over the polar tree; boxplus for left children,
/// sign-aware addition for right children, frozen bits decided 0. Returns
/// the info bits in info_set order.
BitVec sc_decode(const PolarCodeSpec& spec, const LlrFrame& frame);

/// LLR path-metric list decoding, no CRC. Survivors are the list_size
/// lowest-metric paths, ties broken toward the earlier path. The returned
/// path is the lowest-metric one (every completed path encodes validly).
BitVec scl_decode(const PolarCodeSpec& spec, const LlrFrame& frame,
                  const SclConfig& cfg);

namespace detail {
/// Metric increment for deciding `bit` on a leaf with the given LLR;
/// nonnegative, zero only when the decision agrees with an infinite LLR.
double decision_penalty(double llr, std::uint8_t bit, PathMetric pm);
}  // namespace detail

}  // namespace polarfloor
