#include "polarfloor/channel.hpp"

#include <cmath>

namespace polarfloor {

ChannelConfig ChannelConfig::from_ebn0(double ebn0_db, double rate) {
  require(rate > 0.0 && rate <= 1.0, "rate must be in (0, 1]");
  ChannelConfig cfg;
  cfg.ebn0_db = ebn0_db;
  cfg.rate = rate;
  cfg.sigma2 = 1.0 / (2.0 * rate * std::pow(10.0, ebn0_db / 10.0));
  return cfg;
}

Eigen::ArrayXd modulate(const BitVec& x) {
  return 1.0 - 2.0 * x.cast<double>();
}

LlrFrame transmit(const Eigen::ArrayXd& symbols, const ChannelConfig& cfg,
                  RngStream& rng) {
  require(cfg.sigma2 > 0.0, "sigma2 must be positive");
  const double sigma = std::sqrt(cfg.sigma2);
  LlrFrame frame;
  frame.y.resize(symbols.size());
  for (Eigen::Index i = 0; i < symbols.size(); ++i) {
    frame.y[i] = symbols[i] + sigma * rng.gaussian();
  }
  frame.values = 2.0 * frame.y / cfg.sigma2;
  frame.sigma2 = cfg.sigma2;
  return frame;
}

LlrFrame frame_from_y(Eigen::ArrayXd y, double sigma2) {
  require(sigma2 > 0.0, "sigma2 must be positive");
  LlrFrame frame;
  frame.values = 2.0 * y / sigma2;
  frame.y = std::move(y);
  frame.sigma2 = sigma2;
  return frame;
}

double ebn0_to_esn0(double ebn0_db, double rate) {
  require(rate > 0.0, "rate must be positive");
  return ebn0_db + 10.0 * std::log10(rate);
}

}  // namespace polarfloor
