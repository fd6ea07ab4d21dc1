#pragma once

#include <Eigen/Core>

#include "polarfloor/rng.hpp"
#include "polarfloor/types.hpp"

namespace polarfloor {

// BPSK over AWGN with unit symbol energy; sigma2 is derived from the
// per-information-bit SNR and the code rate.
struct ChannelConfig {
  double ebn0_db = 0.0;
  double rate = 1.0;
  double sigma2 = 0.0;
  double es = 1.0;

  static ChannelConfig from_ebn0(double ebn0_db, double rate);
};

// One received frame: raw outputs y and the unclipped channel LLRs
// 2*y/sigma2. y is retained so decoders can re-derive LLRs after
// perturbing the input.
struct LlrFrame {
  Eigen::ArrayXd y;
  Eigen::ArrayXd values;
  double sigma2 = 0.0;
};

/// bit 0 -> +1, bit 1 -> -1
Eigen::ArrayXd modulate(const BitVec& x);

LlrFrame transmit(const Eigen::ArrayXd& symbols, const ChannelConfig& cfg,
                  RngStream& rng);

/// Rebuild a frame (LLRs included) from raw outputs and a known noise
/// variance.
LlrFrame frame_from_y(Eigen::ArrayXd y, double sigma2);

double ebn0_to_esn0(double ebn0_db, double rate);

}  // namespace polarfloor
