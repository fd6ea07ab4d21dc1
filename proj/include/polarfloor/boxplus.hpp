#pragma once

#include <algorithm>
#include <cmath>

namespace polarfloor {

/// ln((1+e^{a+b})/(e^a+e^b)) in the overflow-safe form: sign(a)sign(b)
/// min(|a|,|b|) plus two bounded log correction terms.
template <typename Scalar>
inline Scalar boxplus_exact(Scalar a, Scalar b) {
  const Scalar mag = std::min(std::abs(a), std::abs(b));
  const Scalar core = std::copysign(mag, a * b);
  return core + std::log1p(std::exp(-std::abs(a + b))) -
         std::log1p(std::exp(-std::abs(a - b)));
}

/// Min-approximation: the two log terms dropped.
template <typename Scalar>
inline Scalar boxplus_min(Scalar a, Scalar b) {
  return std::copysign(std::min(std::abs(a), std::abs(b)), a * b);
}

struct ExactBox {
  template <typename Scalar>
  static Scalar apply(Scalar a, Scalar b) {
    return boxplus_exact(a, b);
  }
};

struct MinBox {
  template <typename Scalar>
  static Scalar apply(Scalar a, Scalar b) {
    return boxplus_min(a, b);
  }
};

template <typename Scalar>
inline Scalar clip_llr(Scalar v, Scalar llr_max) {
  return std::clamp(v, -llr_max, llr_max);
}

template <typename Scalar>
struct PeOutputs {
  Scalar r_out1, r_out2, l_out1, l_out2;
};

/// One processing element. Port 1 is the XOR side, port 2 the pass-through
/// side. The internal sum l_in2 + r_in2 is formed unclipped; only the four
/// outputs are clipped. alpha scales the boxplus outputs, not the additive
/// terms.
template <typename Scalar, typename F>
inline PeOutputs<Scalar> pe_update(Scalar l_in1, Scalar l_in2, Scalar r_in1,
                                   Scalar r_in2, F&& f, Scalar alpha,
                                   Scalar llr_max) {
  const Scalar sum2 = l_in2 + r_in2;
  const Scalar f_cross = f(r_in1, l_in1);
  PeOutputs<Scalar> out;
  out.r_out1 = clip_llr(alpha * f(r_in1, sum2), llr_max);
  out.r_out2 = clip_llr(alpha * f_cross + r_in2, llr_max);
  out.l_out1 = clip_llr(alpha * f(l_in1, sum2), llr_max);
  out.l_out2 = clip_llr(alpha * f_cross + l_in2, llr_max);
  return out;
}

}  // namespace polarfloor
