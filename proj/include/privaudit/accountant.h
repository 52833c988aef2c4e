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
//
// Closed-form hypothesis-testing privacy calculus: trade-off functions for
// (epsilon, delta)-DP and Gaussian DP, composition and noisy-SGD accounting,
// the GDP <-> DP duality, and the derived upper bounds on membership
// advantage and positive predictive value.

#ifndef PRIVAUDIT_ACCOUNTANT_H_
#define PRIVAUDIT_ACCOUNTANT_H_

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace privaudit {

// An (epsilon, delta) differential-privacy budget. epsilon >= 0 and
// 0 <= delta < 1.
struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;
};

// The single parameter of Gaussian differential privacy, mu >= 0.
struct GdpParams {
  double mu = 0.0;
};

// Privacy-relevant description of a noisy SGD run: Gaussian noise multiplier
// sigma (relative to the clip norm), sampling ratio tau = batch / n, and the
// total number of noisy gradient steps.
struct SgdPrivacySpec {
  double noise_multiplier = 1.0;
  double sampling_ratio = 1.0;
  int64_t steps = 1;
};

// Throw std::invalid_argument if the parameter invariants are violated.
void Validate(const PrivacyParams& params);
void Validate(const GdpParams& params);
void Validate(const SgdPrivacySpec& spec);

// Trade-off function of an (epsilon, delta)-DP mechanism at type I error
// alpha: max{0, 1 - delta - e^eps * alpha, e^-eps * (1 - delta - alpha)}.
double EpsDeltaTradeoff(const PrivacyParams& params, double alpha);

// Gaussian trade-off function G_mu(alpha) = Phi(Phi^-1(1 - alpha) - mu).
// The endpoints alpha = 0 and alpha = 1 evaluate to 1 and 0 by limit.
double GdpTradeoff(const GdpParams& params, double alpha);

// Composition of GDP mechanisms: mu = sqrt(sum mu_i^2). An empty list
// composes to mu = 0.
GdpParams ComposeGdp(const std::vector<double>& mus);

// GDP parameter of a subsampled noisy SGD run:
// mu = tau * sqrt(T * (e^(1/sigma^2) - 1)).
// Rejects sigma < 0.1, where the exponential leaves any practical range.
GdpParams NoisySgdMu(const SgdPrivacySpec& spec);

// Dual (epsilon, delta)-DP curve of a mu-GDP mechanism:
// delta(eps) = Phi(-eps/mu + mu/2) - e^eps * Phi(-eps/mu - mu/2).
// mu = 0 is perfectly private and yields 0 for every epsilon.
double GdpToDp(const GdpParams& params, double epsilon);

// Smallest epsilon >= 0 with GdpToDp(mu, epsilon) <= delta, by bisection to
// 1e-6 absolute. Requires mu > 0 and delta in (0, 1).
double DpEpsilonForDelta(const GdpParams& params, double delta);

// Noise multiplier sigma such that the noisy SGD run meets the target
// (epsilon, delta) budget within 1% relative error on epsilon. Bisection
// over sigma in [0.1, 1e6]; throws UnreachableBudgetError if no sigma in
// that range reaches the target.
double SigmaForTargetEpsilon(const PrivacyParams& target,
                             double sampling_ratio, int64_t steps);

// Upper bound on membership advantage at false positive rate alpha:
// 1 - f_{eps,delta}(alpha) - alpha, clamped below at 0.
double AdvantageBound(const PrivacyParams& params, double alpha);

// Maximum of AdvantageBound over a uniform alpha grid of grid_size points
// in (0, 1]. Requires grid_size >= 2.
double MaxAdvantageBound(const PrivacyParams& params, int grid_size);

// Upper bound on positive predictive value at false positive rate alpha and
// non-member:member prior ratio gamma:
// (1 - f) / (1 - f + gamma * alpha) with f = f_{eps,delta}(alpha).
// alpha = 0 is rejected (the ratio is 0/0 there).
double PpvBound(const PrivacyParams& params, double alpha, double gamma);

struct BoundCurveRow {
  double epsilon;
  double delta;
  double alpha;
  double gamma;
  double adv_bound;
  double ppv_bound;
};

// Tabulates AdvantageBound and PpvBound over the cartesian product of the
// parameter list and the alpha/gamma grids.
std::vector<BoundCurveRow> BoundCurves(const std::vector<PrivacyParams>& params,
                                       const std::vector<double>& alphas,
                                       const std::vector<double>& gammas);

// CSV with header `epsilon,delta,alpha,gamma,adv_bound,ppv_bound`, values in
// decimal notation with 9 significant digits.
void WriteBoundCurvesCsv(std::ostream& out,
                         const std::vector<BoundCurveRow>& rows);

}  // namespace privaudit

#endif  // PRIVAUDIT_ACCOUNTANT_H_
