#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "polarfloor/types.hpp"

namespace polarfloor {

// Bhattacharyya parameters of the N synthesized bit channels; lower is
// more reliable.
struct ReliabilityProfile {
  Eigen::ArrayXd z;
};

enum class Construction { bhattacharyya, explicit_set, extended };

struct ExtendedInfo {
  std::uint64_t parent_digest = 0;
  int m = 0;
  std::uint64_t seed = 0;
};

struct PolarCodeSpec {
  int n = 0;                  // log2 of block length
  int block_length = 0;       // N = 2^n
  int k = 0;                  // information bits
  std::vector<int> info_set;  // sorted, size k
  double design_esn0_db = 0.0;
  Construction construction = Construction::bhattacharyya;
  ExtendedInfo extended;  // meaningful when construction == extended
  std::uint64_t digest = 0;
  std::vector<std::uint8_t> frozen_mask;  // N entries, 1 = frozen

  double rate() const { return double(k) / double(block_length); }
  bool is_frozen(int i) const { return frozen_mask[size_t(i)] != 0; }
};

/// 64-bit content hash of (N, k, sorted info set); identifies the code in
/// report and test-set files.
std::uint64_t code_digest(int block_length, int k,
                          const std::vector<int>& info_set);

/// Z-parameter recursion Z- = 2Z - Z^2, Z+ = Z^2 from Z0 = exp(-Es/N0),
/// assigning Z- to the lower half of each index block (MSB-first), which
/// matches the F^(x)n transform without bit reversal.
ReliabilityProfile bhattacharyya_profile(int n, double design_esn0_db);

/// Channel indices ranked most reliable first. Equal Z breaks toward the
/// higher index so the ordering is reproducible.
std::vector<int> reliability_order(const ReliabilityProfile& profile);

PolarCodeSpec construct_bhattacharyya(int n, int k, double design_esn0_db);

/// Spec from a caller-supplied information set (tests, imported codes).
PolarCodeSpec make_explicit(int n, std::vector<int> info_set,
                            double design_esn0_db = 0.0);

/// Freezes m extra positions drawn uniformly (seeded) from the parent's
/// information set. m = 0 returns the parent unchanged.
PolarCodeSpec extend_frozen(const PolarCodeSpec& parent, int m,
                            std::uint64_t seed);

/// In-place v -> v * G_N over GF(2). G_N = F^(x)n is an involution, so the
/// same butterfly also inverts.
void polar_transform(BitVec& v);

BitVec expand_info(const PolarCodeSpec& spec, const BitVec& info_bits);
BitVec extract_info(const PolarCodeSpec& spec, const BitVec& u);

/// info bits -> codeword: u has info bits at info_set positions and zeros
/// on the frozen set, x = u * G_N.
BitVec encode(const PolarCodeSpec& spec, const BitVec& info_bits);

void save_code_spec(const std::filesystem::path& path,
                    const PolarCodeSpec& spec);
PolarCodeSpec load_code_spec(const std::filesystem::path& path);

}  // namespace polarfloor
