/*
 * Copyright 2026 The mccshap Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mccshap/error.hpp"

#include <string>

namespace mccshap {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnknownFeature: return "UnknownFeature";
    case ErrorCode::kEmptyCoalition: return "EmptyCoalition";
    case ErrorCode::kTooManyFeatures: return "TooManyFeatures";
    case ErrorCode::kWidthMismatch: return "WidthMismatch";
    case ErrorCode::kFileUnreadable: return "FileUnreadable";
    case ErrorCode::kDuplicateColumnName: return "DuplicateColumnName";
    case ErrorCode::kNoUsableRows: return "NoUsableRows";
    case ErrorCode::kTooFewRows: return "TooFewRows";
    case ErrorCode::kNonNumericFeature: return "NonNumericFeature";
    case ErrorCode::kSingularDesign: return "SingularDesign";
    case ErrorCode::kNonBinaryTarget: return "NonBinaryTarget";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kDegenerateVariance: return "DegenerateVariance";
    case ErrorCode::kSingularCoalition: return "SingularCoalition";
    case ErrorCode::kOrthogonalityViolation: return "OrthogonalityViolation";
    case ErrorCode::kInfeasibleCorrelation: return "InfeasibleCorrelation";
  }
  return "Unknown";
}

ErrorCategory CategoryOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnknownFeature:
    case ErrorCode::kEmptyCoalition:
    case ErrorCode::kTooManyFeatures:
    case ErrorCode::kWidthMismatch:
      return ErrorCategory::kUsage;
    case ErrorCode::kFileUnreadable:
    case ErrorCode::kDuplicateColumnName:
    case ErrorCode::kNoUsableRows:
    case ErrorCode::kTooFewRows:
    case ErrorCode::kNonNumericFeature:
    case ErrorCode::kSingularDesign:
    case ErrorCode::kNonBinaryTarget:
    case ErrorCode::kKTooLarge:
      return ErrorCategory::kData;
    case ErrorCode::kDegenerateVariance:
    case ErrorCode::kSingularCoalition:
    case ErrorCode::kOrthogonalityViolation:
    case ErrorCode::kInfeasibleCorrelation:
      return ErrorCategory::kNumerical;
  }
  return ErrorCategory::kUsage;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace mccshap
