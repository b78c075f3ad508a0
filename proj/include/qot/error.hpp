// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace qot {

enum class ErrorCode {
  shape_mismatch,
  domain,          // invalid mathematical input (non-self-adjoint, not a projection, ...)
  numerical,       // solver/eigendecomposition failure, quadrature non-convergence
  infeasible,      // transport endpoints in different accessibility components
  non_convergence,
  config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace qot
