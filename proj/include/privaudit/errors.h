// Copyright 2026 The Privaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVAUDIT_ERRORS_H_
#define PRIVAUDIT_ERRORS_H_

#include <stdexcept>
#include <string>

namespace privaudit {

// No decision threshold satisfies the requested false positive rate.
class UnreachableFprError : public std::runtime_error {
 public:
  explicit UnreachableFprError(const std::string& what)
      : std::runtime_error(what) {}
};

// No noise multiplier in the supported range meets the privacy target.
class UnreachableBudgetError : public std::runtime_error {
 public:
  explicit UnreachableBudgetError(const std::string& what)
      : std::runtime_error(what) {}
};

// Training loss became non-finite.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

// The holdout splits cannot be carved into the requested shadow folds.
class InsufficientHoldoutError : public std::runtime_error {
 public:
  explicit InsufficientHoldoutError(const std::string& what)
      : std::runtime_error(what) {}
};

// PPV is undefined because no record was predicted a member.
class NoPositivePredictionsError : public std::runtime_error {
 public:
  explicit NoPositivePredictionsError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace privaudit

#endif  // PRIVAUDIT_ERRORS_H_
