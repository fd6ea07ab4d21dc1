#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "polarfloor/bp_decoder.hpp"
#include "polarfloor/types.hpp"

namespace polarfloor {

// Captured frames on which BP recovers the transmitted word at a high
// clipping value but not at a low one. Binary format (all little-endian):
//   magic "PLRTSET1",
//   version, N, k, code digest (u64),
//   sigma2, collection Eb/N0 dB, llr_max_pass, llr_max_fail (f32),
//   master seed, record count (u64),
//   then the decoder settings used for the pass/fail decodes:
//   max_iters, boxplus, stopping, precision (u64), alpha (f32),
//   then per record: frame id (u64), true u packed LSB-first
//   (ceil(N/8) bytes), y (f32 x N), channel LLRs (f32 x N).
struct TestSetHeader {
  std::uint64_t version = 1;
  std::uint64_t block_length = 0;
  std::uint64_t k = 0;
  std::uint64_t code_digest = 0;
  float sigma2 = 0.0f;
  float ebn0_db = 0.0f;
  float llr_max_pass = 100.0f;
  float llr_max_fail = 20.0f;
  std::uint64_t master_seed = 0;
  std::uint64_t record_count = 0;
  std::uint64_t max_iters = 200;
  std::uint64_t boxplus = 1;
  std::uint64_t stopping = 1;
  std::uint64_t precision = 0;
  float alpha = 1.0f;
};

struct TestSetRecord {
  std::uint64_t frame_id = 0;
  BitVec true_u;        // length N
  Eigen::ArrayXf y;     // length N
  Eigen::ArrayXf llr;   // length N
};

struct TestSet {
  TestSetHeader header;
  std::vector<TestSetRecord> records;
};

/// The decoder settings stored in the header, with the given clipping value.
DecoderConfig test_set_decoder_config(const TestSetHeader& header,
                                      double llr_max);

void save_test_set(const std::filesystem::path& path, const TestSet& set);
TestSet load_test_set(const std::filesystem::path& path);

}  // namespace polarfloor
