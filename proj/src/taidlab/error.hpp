// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#pragma once

#include <stdexcept>
#include <string>

namespace taidlab {

enum class ErrorCode {
  kInvalidInput,
  kDimension,
  kInvalidParameter,
  kRange,
  kInvalidKernel,
  kConfig,
  kRunFailed,
  kIo,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace taidlab
