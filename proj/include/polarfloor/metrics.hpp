#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "polarfloor/bp_decoder.hpp"
#include "polarfloor/channel.hpp"
#include "polarfloor/polar_code.hpp"
#include "polarfloor/testset.hpp"

namespace polarfloor {

// Per SNR point: simulate until min_block_errors AND min_frames are both
// reached, or max_frames is hit. Frames are processed in fixed-size rounds
// so the stopping decision does not depend on the worker count.
struct StopRule {
  std::uint64_t min_frames = 1;
  std::uint64_t min_block_errors = 100;
  std::uint64_t max_frames = 1000000;
};

struct SimOptions {
  bool all_zero = false;  // transmit the all-zero codeword instead of data
  int workers = 1;
};

struct SimPoint {
  double ebn0_db = 0.0;
  std::uint64_t frames = 0;
  std::uint64_t bit_errors = 0;    // information-bit errors
  std::uint64_t block_errors = 0;  // frames with any information-bit error
  double ber = 0.0;
  double bler = 0.0;
  double mean_iters = 0.0;
  double ci_low = 0.0;   // 95% interval on BER
  double ci_high = 0.0;
  std::uint64_t converged_frames = 0;  // not part of the CSV
  double wall_time_s = 0.0;            // not part of the CSV
};

struct SimMeta {
  std::uint64_t code_digest = 0;
  int n = 0, block_length = 0, k = 0;
  DecoderConfig cfg;
  std::uint64_t seed = 0;
  StopRule stop;
  bool all_zero = false;
};

struct SimReport {
  SimMeta meta;
  std::vector<SimPoint> points;
};

SimReport estimate_error_rates(const PolarCodeSpec& spec,
                               const DecoderConfig& cfg,
                               const std::vector<double>& ebn0_grid,
                               const StopRule& stop, std::uint64_t seed,
                               const SimOptions& opts = {});

// Single-value relative floor measure: the mean over SNR points of the
// BER ratio against a reference clipping value.
struct NePoint {
  double ebn0_db = 0.0;
  double ber = 0.0;
  double ber_ref = 0.0;
  double ratio = 0.0;
};

struct NeReport {
  double llr_max = 0.0;
  double llr_max_ref = 0.0;
  std::vector<NePoint> points;
  double ne = 0.0;
};

/// Both reports must cover the same grid with the same code and decoder
/// settings apart from llr_max. A zero reference BER at any point is a
/// DataError (insufficient statistics), never skipped.
NeReport compute_ne(const SimReport& curve, const SimReport& ref);

/// 95% binomial proportion interval. Normal approximation for 10 or more
/// errors, exact tail bounds below that; 0 errors gives
/// (0, 1 - 0.05^(1/trials)).
std::pair<double, double> confidence_interval(std::uint64_t errors,
                                              std::uint64_t trials);

struct CollectConfig {
  double ebn0_db = 5.0;
  double llr_max_pass = 100.0;
  double llr_max_fail = 20.0;
  std::uint64_t target_count = 200;
  std::uint64_t seed = 1;
  std::uint64_t max_frames = 10000000;
  DecoderConfig base;  // llr_max is overridden by pass/fail values
  int workers = 1;
};

struct CollectResult {
  TestSet set;
  bool complete = false;
  std::uint64_t frames_scanned = 0;
  double acceptance_rate = 0.0;
};

/// Streams random frames at the collection SNR and keeps those where BP at
/// llr_max_fail fails (no valid codeword found and the transmitted u not
/// recovered) while BP at llr_max_pass converges to the transmitted u.
/// Frames are quantized to f32 before the predicate decodes, so a stored
/// record replays byte-exactly.
CollectResult collect_test_set(const PolarCodeSpec& spec,
                               const CollectConfig& cfg);

struct ValidationResult {
  std::uint64_t checked = 0;
  std::uint64_t failures = 0;
  bool ok() const { return failures == 0; }
};

/// Replays every record and re-checks the pass/fail predicate.
ValidationResult validate_test_set(const TestSet& set,
                                   const PolarCodeSpec& spec,
                                   int workers = 1);

// --- report files ---------------------------------------------------------

/// Atomic write (temp file + rename). Columns, in order: ebn0_db, frames,
/// bit_errors, block_errors, ber, bler, mean_iters, ci_low, ci_high.
void write_sim_report_csv(const std::filesystem::path& path,
                          const SimReport& report);
SimReport read_sim_report_csv(const std::filesystem::path& path);

void write_ne_report_csv(const std::filesystem::path& path,
                         const NeReport& report, std::uint64_t code_digest);

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content);

std::string format_double(double v);

}  // namespace polarfloor
