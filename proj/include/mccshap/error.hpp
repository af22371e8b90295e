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

#ifndef MCCSHAP_ERROR_HPP_
#define MCCSHAP_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mccshap {

enum class ErrorCode {
  // Usage.
  kInvalidArgument,
  kUnknownFeature,
  kEmptyCoalition,
  kTooManyFeatures,
  kWidthMismatch,
  // Data and model.
  kFileUnreadable,
  kDuplicateColumnName,
  kNoUsableRows,
  kTooFewRows,
  kNonNumericFeature,
  kSingularDesign,
  kNonBinaryTarget,
  kKTooLarge,
  // Numerical.
  kDegenerateVariance,
  kSingularCoalition,
  kOrthogonalityViolation,
  kInfeasibleCorrelation,
};

enum class ErrorCategory { kUsage, kData, kNumerical };

std::string_view ErrorCodeName(ErrorCode code);
ErrorCategory CategoryOf(ErrorCode code);

// All library failures are reported with this exception type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return CategoryOf(code_); }

 private:
  ErrorCode code_;
};

}  // namespace mccshap

#endif  // MCCSHAP_ERROR_HPP_
