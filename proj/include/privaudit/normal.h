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

#ifndef PRIVAUDIT_NORMAL_H_
#define PRIVAUDIT_NORMAL_H_

namespace privaudit {

// Standard normal CDF, computed through the complementary error function.
double NormalCdf(double x);

// log(NormalCdf(x)), stable far into the lower tail where the CDF itself
// underflows.
double LogNormalCdf(double x);

// Standard normal quantile (inverse CDF). Accurate to well below 1e-9
// absolute over (0, 1); returns -inf at p = 0 and +inf at p = 1.
// Throws std::domain_error outside [0, 1].
double NormalQuantile(double p);

}  // namespace privaudit

#endif  // PRIVAUDIT_NORMAL_H_
