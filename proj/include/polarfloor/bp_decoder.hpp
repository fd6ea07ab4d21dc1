#pragma once

#include <Eigen/Core>
#include <cassert>
#include <numeric>
#include <span>
#include <vector>

#include "polarfloor/boxplus.hpp"
#include "polarfloor/channel.hpp"
#include "polarfloor/polar_code.hpp"
#include "polarfloor/types.hpp"

namespace polarfloor {

enum class BoxplusMode { exact, min_approx };
enum class Stopping { fixed_iters, gmatrix_check };
enum class Precision { f32, f64 };

struct DecoderConfig {
  double llr_max = 20.0;
  int max_iters = 200;
  BoxplusMode boxplus = BoxplusMode::min_approx;
  double alpha = 1.0;
  Stopping stopping = Stopping::gmatrix_check;
  Precision precision = Precision::f32;
  int flip_window = 10;  // iterations of decision-sign history kept

  void validate() const {
    require(llr_max > 0.0, "llr_max must be positive");
    require(max_iters >= 1, "max_iters must be at least 1");
    require(alpha > 0.0 && alpha <= 1.0, "alpha must be in (0, 1]");
    require(flip_window >= 1, "flip_window must be at least 1");
  }
};

struct DecodeResult {
  BitVec u_hat;
  BitVec x_hat;
  int iterations_used = 0;
  bool converged = false;
  Eigen::ArrayXi sign_flip_counts;  // decision-sign changes, last W iterations
  Eigen::ArrayXd decision_llr;      // terminal L+R on the u side
};

// A prior pinned to +/-llr_max before decoding starts (belief pushing).
struct PinnedBit {
  int index = 0;
  int sign = +1;
};

/// true iff x_hat = u_hat * G_N and u_hat is zero on the frozen set.
inline bool check_codeword(const BitVec& u_hat, const BitVec& x_hat,
                           const PolarCodeSpec& spec) {
  require(int(u_hat.size()) == spec.block_length &&
              int(x_hat.size()) == spec.block_length,
          "vectors must have length N");
  for (int i = 0; i < spec.block_length; ++i) {
    if (spec.is_frozen(i) && u_hat[i] != 0) return false;
  }
  BitVec re = u_hat;
  polar_transform(re);
  return (re == x_hat).all();
}

// Iterative message passing over the polar factor graph. Stage 0 holds the
// u-side beliefs, stage n the channel side. Layer j of the graph applies
// the kernel with stride 2^layer_order[j]; the identity order is the
// conventional graph and any permutation realizes the same code.
//
// One iteration is a full right-to-left L-pass followed by a full
// left-to-right R-pass; within a stage all PEs read the previous pass's
// values. Every written message is clipped to +/-llr_max.
template <typename Scalar>
class BpDecoder {
 public:
  BpDecoder(const PolarCodeSpec& spec, const DecoderConfig& cfg)
      : spec_(&spec), cfg_(cfg), n_(spec.n), N_(spec.block_length) {
    cfg_.validate();
    L_.setZero(n_ + 1, N_);
    R_.setZero(n_ + 1, N_);
    layer_order_.resize(size_t(n_));
    std::iota(layer_order_.begin(), layer_order_.end(), 0);
    prior_ = Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(N_);
    const Scalar cap = Scalar(cfg_.llr_max);
    for (int i = 0; i < N_; ++i) {
      if (spec.is_frozen(i)) prior_[i] = cap;
    }
    dec_sign_.assign(size_t(N_), 0);
    prev_sign_.assign(size_t(N_), 0);
    flip_ring_.assign(size_t(cfg_.flip_window),
                      std::vector<std::uint8_t>(size_t(N_), 0));
    u_scratch_ = BitVec::Zero(N_);
  }

  const PolarCodeSpec& spec() const { return *spec_; }
  const DecoderConfig& config() const { return cfg_; }

  /// Graph realization: order must be a permutation of {0..n-1}.
  void set_layer_order(const std::vector<int>& order) {
    require(int(order.size()) == n_, "layer order must have n entries");
    std::vector<bool> seen(size_t(n_), false);
    for (int v : order) {
      require(v >= 0 && v < n_ && !seen[size_t(v)],
              "layer order must be a permutation of 0..n-1");
      seen[size_t(v)] = true;
    }
    layer_order_ = order;
  }

  void init_messages(const LlrFrame& frame,
                     std::span<const PinnedBit> pins = {}) {
    require(int(frame.values.size()) == N_, "frame length must equal N");
    const Scalar cap = Scalar(cfg_.llr_max);
    L_.setZero();
    R_.setZero();
    R_.row(0) = prior_.transpose();
    for (const PinnedBit& p : pins) {
      require(p.index >= 0 && p.index < N_, "pinned index out of range");
      R_(0, p.index) = p.sign >= 0 ? cap : -cap;
    }
    Scalar* lch = row_ptr(L_, n_);
    for (int i = 0; i < N_; ++i) {
      lch[i] = clip_llr(Scalar(frame.values[i]), cap);
    }
    iterations_done_ = 0;
    transitions_recorded_ = 0;
  }

  void run_iteration() {
    if (cfg_.boxplus == BoxplusMode::min_approx) {
      iteration_impl<MinBox>();
    } else {
      iteration_impl<ExactBox>();
    }
    ++iterations_done_;
    record_signs();
#ifndef NDEBUG
    assert(L_.isFinite().all() && R_.isFinite().all());
    assert((L_.abs() <= Scalar(cfg_.llr_max)).all());
    assert((R_.abs() <= Scalar(cfg_.llr_max)).all());
#endif
  }

  /// (u_hat, x_hat) from the current beliefs; L+R >= 0 decides 0.
  std::pair<BitVec, BitVec> hard_decision() const {
    BitVec u(N_), x(N_);
    const Scalar* l0 = row_ptr(L_, 0);
    const Scalar* r0 = row_ptr(R_, 0);
    const Scalar* ln = row_ptr(L_, n_);
    const Scalar* rn = row_ptr(R_, n_);
    for (int i = 0; i < N_; ++i) {
      u[i] = std::uint8_t(l0[i] + r0[i] < Scalar(0));
      x[i] = std::uint8_t(ln[i] + rn[i] < Scalar(0));
    }
    return {std::move(u), std::move(x)};
  }

  DecodeResult decode(const LlrFrame& frame,
                      std::span<const PinnedBit> pins = {}) {
    init_messages(frame, pins);
    bool converged = false;
    BitVec u_hat, x_hat;
    for (int it = 0; it < cfg_.max_iters; ++it) {
      run_iteration();
      if (cfg_.stopping == Stopping::gmatrix_check) {
        auto [u, x] = hard_decision();
        if (valid_codeword(u, x)) {
          u_hat = std::move(u);
          x_hat = std::move(x);
          converged = true;
          break;
        }
        if (it + 1 == cfg_.max_iters) {
          u_hat = std::move(u);
          x_hat = std::move(x);
        }
      }
    }
    if (cfg_.stopping == Stopping::fixed_iters) {
      std::tie(u_hat, x_hat) = hard_decision();
      converged = valid_codeword(u_hat, x_hat);
    }

    DecodeResult res;
    res.u_hat = std::move(u_hat);
    res.x_hat = std::move(x_hat);
    res.iterations_used = iterations_done_;
    res.converged = converged;
    res.sign_flip_counts = flip_counts();
    res.decision_llr.resize(N_);
    const Scalar* l0 = row_ptr(L_, 0);
    const Scalar* r0 = row_ptr(R_, 0);
    for (int i = 0; i < N_; ++i) {
      res.decision_llr[i] = double(l0[i]) + double(r0[i]);
    }
    return res;
  }

  const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>&
  left_messages() const {
    return L_;
  }
  const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>&
  right_messages() const {
    return R_;
  }
  int iterations_done() const { return iterations_done_; }

 private:
  using MsgArray =
      Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  static Scalar* row_ptr(MsgArray& m, int stage) {
    return m.data() + Eigen::Index(stage) * m.cols();
  }
  static const Scalar* row_ptr(const MsgArray& m, int stage) {
    return m.data() + Eigen::Index(stage) * m.cols();
  }

  template <typename BoxF>
  void iteration_impl() {
    const Scalar cap = Scalar(cfg_.llr_max);
    const Scalar alpha = Scalar(cfg_.alpha);

    // L-pass, channel side toward u side
    for (int layer = n_ - 1; layer >= 0; --layer) {
      const int st = 1 << layer_order_[size_t(layer)];
      Scalar* lw = row_ptr(L_, layer);
      const Scalar* lr = row_ptr(L_, layer + 1);
      const Scalar* rr = row_ptr(R_, layer);
      for (int base = 0; base < N_; base += 2 * st) {
        for (int a = base; a < base + st; ++a) {
          const int b = a + st;
          const Scalar sum2 = lr[b] + rr[b];
          const Scalar f_cross = BoxF::apply(rr[a], lr[a]);
          lw[a] = clip_llr(alpha * BoxF::apply(lr[a], sum2), cap);
          lw[b] = clip_llr(alpha * f_cross + lr[b], cap);
        }
      }
    }
    // R-pass, u side toward channel side
    for (int layer = 0; layer < n_; ++layer) {
      const int st = 1 << layer_order_[size_t(layer)];
      Scalar* rw = row_ptr(R_, layer + 1);
      const Scalar* rr = row_ptr(R_, layer);
      const Scalar* lr = row_ptr(L_, layer + 1);
      for (int base = 0; base < N_; base += 2 * st) {
        for (int a = base; a < base + st; ++a) {
          const int b = a + st;
          const Scalar sum2 = lr[b] + rr[b];
          const Scalar f_cross = BoxF::apply(rr[a], lr[a]);
          rw[a] = clip_llr(alpha * BoxF::apply(rr[a], sum2), cap);
          rw[b] = clip_llr(alpha * f_cross + rr[b], cap);
        }
      }
    }
  }

  bool valid_codeword(const BitVec& u, const BitVec& x) {
    for (int i = 0; i < N_; ++i) {
      if (spec_->is_frozen(i) && u[i] != 0) return false;
    }
    u_scratch_ = u;
    polar_transform(u_scratch_);
    return (u_scratch_ == x).all();
  }

  void record_signs() {
    const Scalar* l0 = row_ptr(L_, 0);
    const Scalar* r0 = row_ptr(R_, 0);
    for (int i = 0; i < N_; ++i) {
      dec_sign_[size_t(i)] = std::uint8_t(l0[i] + r0[i] < Scalar(0));
    }
    if (iterations_done_ >= 2) {
      auto& slot =
          flip_ring_[size_t((iterations_done_ - 2) % cfg_.flip_window)];
      for (int i = 0; i < N_; ++i) {
        slot[size_t(i)] = std::uint8_t(dec_sign_[size_t(i)] != prev_sign_[size_t(i)]);
      }
      ++transitions_recorded_;
    }
    std::swap(dec_sign_, prev_sign_);
  }

  Eigen::ArrayXi flip_counts() const {
    Eigen::ArrayXi counts = Eigen::ArrayXi::Zero(N_);
    const int valid = std::min(transitions_recorded_, cfg_.flip_window);
    for (int s = 0; s < valid; ++s) {
      const auto& slot = flip_ring_[size_t(s)];
      for (int i = 0; i < N_; ++i) counts[i] += slot[size_t(i)];
    }
    return counts;
  }

  const PolarCodeSpec* spec_;
  DecoderConfig cfg_;
  int n_, N_;
  MsgArray L_, R_;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> prior_;
  std::vector<int> layer_order_;
  int iterations_done_ = 0;
  int transitions_recorded_ = 0;
  std::vector<std::uint8_t> dec_sign_, prev_sign_;
  std::vector<std::vector<std::uint8_t>> flip_ring_;
  BitVec u_scratch_;
};

/// Decode with runtime precision dispatch; the hot Monte Carlo paths keep a
/// BpDecoder<Scalar> instead.
DecodeResult bp_decode(const PolarCodeSpec& spec, const LlrFrame& frame,
                       const DecoderConfig& cfg,
                       std::span<const PinnedBit> pins = {},
                       const std::vector<int>* layer_order = nullptr);

}  // namespace polarfloor
