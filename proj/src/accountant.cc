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

#include "privaudit/accountant.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "privaudit/errors.h"
#include "privaudit/normal.h"

namespace privaudit {

namespace {

constexpr double kEpsBisectionTol = 1e-6;   // absolute, on epsilon
constexpr double kSigmaRelativeTol = 0.01;  // relative, on achieved epsilon
constexpr double kSigmaMin = 0.1;
constexpr double kSigmaMax = 1e6;

void CheckAlpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::domain_error("alpha must be in [0, 1]");
  }
}

}  // namespace

void Validate(const PrivacyParams& params) {
  if (!(params.epsilon >= 0.0) || !std::isfinite(params.epsilon)) {
    throw std::invalid_argument("PrivacyParams: epsilon must be >= 0");
  }
  if (!(params.delta >= 0.0 && params.delta < 1.0)) {
    throw std::invalid_argument("PrivacyParams: delta must be in [0, 1)");
  }
}

void Validate(const GdpParams& params) {
  if (!(params.mu >= 0.0) || !std::isfinite(params.mu)) {
    throw std::invalid_argument("GdpParams: mu must be >= 0");
  }
}

void Validate(const SgdPrivacySpec& spec) {
  if (!(spec.noise_multiplier > 0.0)) {
    throw std::invalid_argument("SgdPrivacySpec: noise_multiplier must be > 0");
  }
  if (!(spec.sampling_ratio > 0.0 && spec.sampling_ratio <= 1.0)) {
    throw std::invalid_argument(
        "SgdPrivacySpec: sampling_ratio must be in (0, 1]");
  }
  if (spec.steps < 1) {
    throw std::invalid_argument("SgdPrivacySpec: steps must be >= 1");
  }
}

double EpsDeltaTradeoff(const PrivacyParams& params, double alpha) {
  Validate(params);
  CheckAlpha(alpha);
  const double one_minus_delta = 1.0 - params.delta;
  const double branch_hi = one_minus_delta - std::exp(params.epsilon) * alpha;
  const double branch_lo = std::exp(-params.epsilon) * (one_minus_delta - alpha);
  return std::max({0.0, branch_hi, branch_lo});
}

double GdpTradeoff(const GdpParams& params, double alpha) {
  Validate(params);
  CheckAlpha(alpha);
  if (alpha == 0.0) return 1.0;
  if (alpha == 1.0) return 0.0;
  return NormalCdf(NormalQuantile(1.0 - alpha) - params.mu);
}

GdpParams ComposeGdp(const std::vector<double>& mus) {
  double sum_sq = 0.0;
  for (double mu : mus) {
    Validate(GdpParams{mu});
    sum_sq += mu * mu;
  }
  return GdpParams{std::sqrt(sum_sq)};
}

GdpParams NoisySgdMu(const SgdPrivacySpec& spec) {
  Validate(spec);
  if (spec.noise_multiplier < kSigmaMin) {
    throw std::invalid_argument(
        "NoisySgdMu: noise_multiplier below 0.1 leaves the supported range");
  }
  const double sigma_sq = spec.noise_multiplier * spec.noise_multiplier;
  const double mu = spec.sampling_ratio *
                    std::sqrt(static_cast<double>(spec.steps) *
                              std::expm1(1.0 / sigma_sq));
  return GdpParams{mu};
}

double GdpToDp(const GdpParams& params, double epsilon) {
  Validate(params);
  if (!(epsilon >= 0.0)) {
    throw std::domain_error("GdpToDp: epsilon must be >= 0");
  }
  if (params.mu == 0.0) return 0.0;
  const double mu = params.mu;
  // e^eps * Phi(-eps/mu - mu/2) in log space; the plain product overflows
  // long before the mathematical value leaves [0, 1].
  const double log_term2 = epsilon + LogNormalCdf(-epsilon / mu - mu / 2.0);
  const double term2 = log_term2 < 700.0 ? std::exp(log_term2)
                                         : std::numeric_limits<double>::max();
  const double delta = NormalCdf(-epsilon / mu + mu / 2.0) - term2;
  // The closed form can dip a hair below zero from cancellation.
  return std::clamp(delta, 0.0, 1.0);
}

double DpEpsilonForDelta(const GdpParams& params, double delta) {
  Validate(params);
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("DpEpsilonForDelta: delta must be in (0, 1)");
  }
  if (params.mu == 0.0) return 0.0;
  if (GdpToDp(params, 0.0) <= delta) return 0.0;

  // delta(eps) is non-increasing and reaches ~0 by eps = mu^2 (there the
  // first term is Phi(-mu/2)).
  double lo = 0.0;
  double hi = std::max(4.0, params.mu * params.mu);
  while (GdpToDp(params, hi) > delta) {
    hi *= 2.0;
    if (!std::isfinite(hi)) {
      throw std::runtime_error("DpEpsilonForDelta: failed to bracket epsilon");
    }
  }
  while (hi - lo > kEpsBisectionTol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval below double resolution
    if (GdpToDp(params, mid) <= delta) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double SigmaForTargetEpsilon(const PrivacyParams& target, double sampling_ratio,
                             int64_t steps) {
  Validate(target);
  if (!(target.epsilon > 0.0)) {
    throw std::invalid_argument("SigmaForTargetEpsilon: epsilon must be > 0");
  }
  if (!(target.delta > 0.0)) {
    throw std::invalid_argument("SigmaForTargetEpsilon: delta must be > 0");
  }
  const auto epsilon_at = [&](double sigma) {
    return DpEpsilonForDelta(
        NoisySgdMu(SgdPrivacySpec{sigma, sampling_ratio, steps}), target.delta);
  };

  // epsilon_at is decreasing in sigma.
  const double eps_hi = epsilon_at(kSigmaMin);
  const double eps_lo = epsilon_at(kSigmaMax);
  if (target.epsilon > eps_hi || target.epsilon < eps_lo) {
    throw UnreachableBudgetError(
        "SigmaForTargetEpsilon: target epsilon not reachable with sigma in "
        "[0.1, 1e6]");
  }

  double lo = kSigmaMin;  // epsilon_at(lo) >= target
  double hi = kSigmaMax;  // epsilon_at(hi) <= target
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double eps = epsilon_at(mid);
    if (std::fabs(eps - target.epsilon) <= kSigmaRelativeTol * target.epsilon) {
      return mid;
    }
    if (eps > target.epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw UnreachableBudgetError(
      "SigmaForTargetEpsilon: bisection failed to meet the 1% tolerance");
}

double AdvantageBound(const PrivacyParams& params, double alpha) {
  const double f = EpsDeltaTradeoff(params, alpha);
  return std::max(0.0, 1.0 - f - alpha);
}

double MaxAdvantageBound(const PrivacyParams& params, int grid_size) {
  if (grid_size < 2) {
    throw std::invalid_argument("MaxAdvantageBound: grid_size must be >= 2");
  }
  double best = 0.0;
  for (int i = 1; i <= grid_size; ++i) {
    const double alpha = static_cast<double>(i) / grid_size;
    best = std::max(best, AdvantageBound(params, alpha));
  }
  return best;
}

double PpvBound(const PrivacyParams& params, double alpha, double gamma) {
  if (alpha == 0.0) {
    throw std::domain_error("PpvBound: alpha = 0 is degenerate (0/0)");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("PpvBound: gamma must be > 0");
  }
  const double f = EpsDeltaTradeoff(params, alpha);
  return (1.0 - f) / (1.0 - f + gamma * alpha);
}

std::vector<BoundCurveRow> BoundCurves(const std::vector<PrivacyParams>& params,
                                       const std::vector<double>& alphas,
                                       const std::vector<double>& gammas) {
  if (params.empty() || alphas.empty() || gammas.empty()) {
    throw std::invalid_argument("BoundCurves: grids must be non-empty");
  }
  std::vector<BoundCurveRow> rows;
  rows.reserve(params.size() * alphas.size() * gammas.size());
  for (const PrivacyParams& p : params) {
    for (double alpha : alphas) {
      const double adv = AdvantageBound(p, alpha);
      for (double gamma : gammas) {
        rows.push_back(BoundCurveRow{p.epsilon, p.delta, alpha, gamma, adv,
                                     PpvBound(p, alpha, gamma)});
      }
    }
  }
  return rows;
}

void WriteBoundCurvesCsv(std::ostream& out,
                         const std::vector<BoundCurveRow>& rows) {
  out << "epsilon,delta,alpha,gamma,adv_bound,ppv_bound\n";
  char buf[160];
  for (const BoundCurveRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  row.epsilon, row.delta, row.alpha, row.gamma, row.adv_bound,
                  row.ppv_bound);
    out << buf;
  }
}

}  // namespace privaudit
