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

#include "privaudit/scores.h"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace privaudit {

void WriteScoresCsv(std::ostream& out, const AttackScores& scores) {
  const char* orientation =
      scores.orientation == ScoreOrientation::kLowMeansMember ? "low" : "high";
  out << "record_id,class,score,is_member,orientation\n";
  char buf[64];
  for (const ScoreEntry& e : scores.entries) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.score);
    out << e.record_id << ',' << e.label << ',' << buf << ','
        << (e.is_member ? 1 : 0) << ',' << orientation << "\n";
  }
}

AttackScores ReadScoresCsv(std::istream& in) {
  AttackScores scores;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("ReadScoresCsv: missing header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    ScoreEntry e;
    std::getline(row, field, ',');
    e.record_id = std::stoull(field);
    std::getline(row, field, ',');
    e.label = std::stoi(field);
    std::getline(row, field, ',');
    e.score = std::stod(field);
    std::getline(row, field, ',');
    e.is_member = field == "1";
    std::getline(row, field, ',');
    scores.orientation = field == "low" ? ScoreOrientation::kLowMeansMember
                                        : ScoreOrientation::kHighMeansMember;
    scores.entries.push_back(e);
  }
  return scores;
}

}  // namespace privaudit
