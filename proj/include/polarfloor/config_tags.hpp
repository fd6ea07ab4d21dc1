#pragma once

#include <cstdint>
#include <string>

#include "polarfloor/bp_decoder.hpp"
#include "polarfloor/types.hpp"

namespace polarfloor {

// Stable names and integer codes for the decoder tags; used by report
// files, test-set headers and the CLI.

inline std::string to_string(BoxplusMode m) {
  return m == BoxplusMode::exact ? "exact" : "min";
}
inline std::string to_string(Stopping s) {
  return s == Stopping::fixed_iters ? "fixed" : "gmatrix";
}
inline std::string to_string(Precision p) {
  return p == Precision::f32 ? "f32" : "f64";
}

inline BoxplusMode boxplus_from_string(const std::string& s) {
  if (s == "exact") return BoxplusMode::exact;
  if (s == "min" || s == "min_approx") return BoxplusMode::min_approx;
  throw ParamError("unknown boxplus mode: " + s);
}
inline Stopping stopping_from_string(const std::string& s) {
  if (s == "fixed" || s == "fixed_iters") return Stopping::fixed_iters;
  if (s == "gmatrix" || s == "gmatrix_check") return Stopping::gmatrix_check;
  throw ParamError("unknown stopping rule: " + s);
}
inline Precision precision_from_string(const std::string& s) {
  if (s == "f32") return Precision::f32;
  if (s == "f64") return Precision::f64;
  throw ParamError("unknown precision: " + s);
}

inline std::uint64_t tag_code(BoxplusMode m) {
  return m == BoxplusMode::exact ? 0 : 1;
}
inline std::uint64_t tag_code(Stopping s) {
  return s == Stopping::fixed_iters ? 0 : 1;
}
inline std::uint64_t tag_code(Precision p) {
  return p == Precision::f32 ? 0 : 1;
}

inline BoxplusMode boxplus_from_code(std::uint64_t c) {
  if (c > 1) throw DataError("bad boxplus code");
  return c == 0 ? BoxplusMode::exact : BoxplusMode::min_approx;
}
inline Stopping stopping_from_code(std::uint64_t c) {
  if (c > 1) throw DataError("bad stopping code");
  return c == 0 ? Stopping::fixed_iters : Stopping::gmatrix_check;
}
inline Precision precision_from_code(std::uint64_t c) {
  if (c > 1) throw DataError("bad precision code");
  return c == 0 ? Precision::f32 : Precision::f64;
}

}  // namespace polarfloor
