#include "polarfloor/bp_decoder.hpp"

namespace polarfloor {

namespace {

template <typename Scalar>
DecodeResult dispatch(const PolarCodeSpec& spec, const LlrFrame& frame,
                      const DecoderConfig& cfg, std::span<const PinnedBit> pins,
                      const std::vector<int>* layer_order) {
  BpDecoder<Scalar> dec(spec, cfg);
  if (layer_order) dec.set_layer_order(*layer_order);
  return dec.decode(frame, pins);
}

}  // namespace

DecodeResult bp_decode(const PolarCodeSpec& spec, const LlrFrame& frame,
                       const DecoderConfig& cfg,
                       std::span<const PinnedBit> pins,
                       const std::vector<int>* layer_order) {
  if (cfg.precision == Precision::f32)
    return dispatch<float>(spec, frame, cfg, pins, layer_order);
  return dispatch<double>(spec, frame, cfg, pins, layer_order);
}

}  // namespace polarfloor
