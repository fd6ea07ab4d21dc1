#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace polarfloor {

// Hard bits over GF(2); values are 0 or 1.
using BitVec = Eigen::Array<std::uint8_t, Eigen::Dynamic, 1>;

// Invalid parameters or unusable configuration (CLI exit code 1).
struct ParamError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Inconsistent or unreadable data: bad files, digest or grid mismatches
// (CLI exit code 2).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ParamError(msg);
}

}  // namespace polarfloor
