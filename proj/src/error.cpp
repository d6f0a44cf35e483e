// Copyright 2026 The skinsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "skinsim/error.hpp"

namespace skinsim {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateAddress: return "DuplicateAddress";
    case ErrorCode::kTooManyTriangles: return "TooManyTriangles";
    case ErrorCode::kMalformedLayout: return "MalformedLayout";
    case ErrorCode::kUnknownTaxel: return "UnknownTaxel";
    case ErrorCode::kPressureOutOfRange: return "PressureOutOfRange";
    case ErrorCode::kDepthExceedsThickness: return "DepthExceedsThickness";
    case ErrorCode::kAddressOverflow: return "AddressOverflow";
    case ErrorCode::kMissingFrame: return "MissingFrame";
    case ErrorCode::kInconsistentTick: return "InconsistentTick";
    case ErrorCode::kBadClassBits: return "BadClassBits";
    case ErrorCode::kCorruptLog: return "CorruptLog";
    case ErrorCode::kEmptyStream: return "EmptyStream";
    case ErrorCode::kMissingCalibration: return "MissingCalibration";
    case ErrorCode::kDegenerateSweep: return "DegenerateSweep";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kNonPositiveSeries: return "NonPositiveSeries";
    case ErrorCode::kInvalidTarget: return "InvalidTarget";
    case ErrorCode::kSegmentOutOfBounds: return "SegmentOutOfBounds";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kIoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace skinsim
