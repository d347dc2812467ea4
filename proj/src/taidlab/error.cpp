// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include "taidlab/error.hpp"

namespace taidlab {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid input";
    case ErrorCode::kDimension: return "dimension mismatch";
    case ErrorCode::kInvalidParameter: return "invalid parameter";
    case ErrorCode::kRange: return "out of range";
    case ErrorCode::kInvalidKernel: return "invalid kernel";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kRunFailed: return "run failed";
    case ErrorCode::kIo: return "i/o error";
  }
  return "unknown error";
}

}  // namespace taidlab
