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

#ifndef PRIVAUDIT_SCORES_H_
#define PRIVAUDIT_SCORES_H_

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace privaudit {

// Whether low or high scores indicate membership. Loss-based scores are low
// for members; ratio- and confidence-based scores are high for members.
enum class ScoreOrientation { kLowMeansMember, kHighMeansMember };

struct ScoreEntry {
  uint64_t record_id = 0;
  int32_t label = 0;
  double score = 0.0;
  bool is_member = false;  // ground truth, used only for evaluation
};

struct AttackScores {
  ScoreOrientation orientation = ScoreOrientation::kLowMeansMember;
  std::vector<ScoreEntry> entries;
};

// CSV with header `record_id,class,score,is_member,orientation`.
void WriteScoresCsv(std::ostream& out, const AttackScores& scores);
AttackScores ReadScoresCsv(std::istream& in);

}  // namespace privaudit

#endif  // PRIVAUDIT_SCORES_H_
