#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polarfloor/bp_decoder.hpp"
#include "polarfloor/channel.hpp"
#include "polarfloor/metrics.hpp"
#include "polarfloor/polar_code.hpp"
#include "polarfloor/rng.hpp"
#include "polarfloor/testset.hpp"

namespace polarfloor {

enum class Strategy { none, guess, virtual_noise, scaled_boxplus, multi_trellis };
enum class GuessMode { exhaustive, genie };

struct MitigationConfig {
  Strategy strategy = Strategy::none;
  DecoderConfig base;
  int guess_max_bits = 1;  // 1..3
  GuessMode guess_mode = GuessMode::exhaustive;
  double sigma_v2 = 0.36;
  int vnoise_attempts = 5;
  double scaled_alpha = 0.9375;
  int max_permutations = 0;  // 0 -> n-1 nontrivial rotations

  void validate() const {
    base.validate();
    if (strategy == Strategy::guess)
      require(guess_max_bits >= 1 && guess_max_bits <= 3,
              "guess bit budget must be 1..3");
    if (strategy == Strategy::virtual_noise) {
      require(sigma_v2 > 0.0, "sigma_v2 must be positive");
      require(vnoise_attempts >= 1, "attempts must be at least 1");
    }
    if (strategy == Strategy::scaled_boxplus)
      require(scaled_alpha > 0.0 && scaled_alpha <= 1.0,
              "scaled alpha must be in (0, 1]");
    if (strategy == Strategy::multi_trellis)
      require(max_permutations >= 0, "permutation budget must be >= 0");
  }
};

struct MitigationStats {
  bool base_converged = false;
  int restarts = 0;                  // decoder re-runs beyond the base pass
  std::uint64_t extra_iterations = 0;  // BP iterations spent in those re-runs
};

struct MitigatedResult {
  DecodeResult result;
  MitigationStats stats;
};

struct SuccessReport {
  std::string strategy;
  std::uint64_t total = 0;
  std::uint64_t recovered = 0;
  double tau = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t recovered_at_base = 0;
  double mean_extra_iters = 0.0;
  double mean_restarts = 0.0;
};

/// Information-set indices ranked by descending decision-sign flip count,
/// ties toward the smaller terminal |L+R|, then the lower index. With no
/// flips recorded this degenerates to a smallest-|L+R| ranking.
std::vector<int> detect_oscillating_bits(const DecodeResult& result,
                                         const PolarCodeSpec& spec,
                                         int top_m);

/// Graph realizations: identity first, then the n-1 nontrivial cyclic
/// left-rotations, then remaining permutations in lexicographic order,
/// `count` entries in total.
std::vector<std::vector<int>> layer_permutations(int n, int count);

/// Belief pushing: re-decode with oscillating bits pinned to +/-llr_max.
/// Exhaustive mode grows the pinned set one bit at a time and tries sign
/// assignments depth-first (+ before -); genie mode pins true signs and is
/// measurement-only.
DecodeResult guess_decode(const PolarCodeSpec& spec, const LlrFrame& frame,
                          const DecoderConfig& cfg, int max_bits,
                          GuessMode mode, const BitVec* true_u = nullptr,
                          MitigationStats* stats = nullptr);

/// Re-decodes y + n_v with n_v ~ N(0, sigma_v2) per attempt; LLRs are
/// recomputed with the original channel sigma2.
DecodeResult virtual_noise_decode(const PolarCodeSpec& spec,
                                  const LlrFrame& frame,
                                  const DecoderConfig& cfg, double sigma_v2,
                                  int attempts, RngStream& rng,
                                  MitigationStats* stats = nullptr);

/// Re-decodes with the boxplus output scaled by alpha; alpha = 1 is the
/// identity and simply repeats the base decoder.
DecodeResult scaled_boxplus_decode(const PolarCodeSpec& spec,
                                   const LlrFrame& frame,
                                   const DecoderConfig& cfg, double alpha,
                                   MitigationStats* stats = nullptr);

/// Re-decodes over permuted-layer factor graph realizations of the same
/// code. The enumerated sequence starts at the identity, so a budget of 1
/// reproduces the base decoder exactly.
DecodeResult multi_trellis_decode(const PolarCodeSpec& spec,
                                  const LlrFrame& frame,
                                  const DecoderConfig& cfg,
                                  int max_permutations,
                                  MitigationStats* stats = nullptr);

/// Base BP first; on failure dispatches to the configured strategy. All
/// strategies are no-ops on frames the base decoder already handles.
MitigatedResult mitigated_decode(const PolarCodeSpec& spec,
                                 const LlrFrame& frame,
                                 const MitigationConfig& cfg, RngStream& rng,
                                 const BitVec* true_u = nullptr);

/// Replays a captured test set through the mitigated decoder; recovery
/// means the exact transmitted u, not merely a valid codeword.
SuccessReport measure_success_rate(const TestSet& set,
                                   const PolarCodeSpec& spec,
                                   const MitigationConfig& cfg,
                                   std::uint64_t seed, int workers = 1);

std::string strategy_label(const MitigationConfig& cfg);

}  // namespace polarfloor
