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

// Shared gtest helpers.

#ifndef MCCSHAP_TESTS_TEST_UTIL_HPP_
#define MCCSHAP_TESTS_TEST_UTIL_HPP_

#include <functional>

#include <gtest/gtest.h>

#include "mccshap/error.hpp"
#include "oracles.hpp"

namespace mccshap::testing {

// Code of the mccshap::Error thrown by fn; records a failure if none is.
inline ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no mccshap::Error thrown";
  return ErrorCode::kInvalidArgument;
}

}  // namespace mccshap::testing

#endif  // MCCSHAP_TESTS_TEST_UTIL_HPP_
