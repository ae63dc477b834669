// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgate/contribution_analysis.hpp"

#include <cmath>
#include <string>

#include "dgate/error.hpp"

namespace dgate {

namespace {

void require_same_horizon(const TimestepPMF& pmf, const Schedule& schedule) {
  if (pmf.T() != schedule.T())
    throw InvalidArgument("pmf has T=" + std::to_string(pmf.T()) + " but schedule has T=" +
                          std::to_string(schedule.T()));
}

}  // namespace

double contribution(const TimestepPMF& pmf, const Schedule& schedule, Timestep t) {
  require_same_horizon(pmf, schedule);
  return pmf.prob(t) * schedule.snr(t);
}

double contribution_dmu(const NormalParams& params, const Schedule& schedule, Timestep t) {
  const double snr = schedule.snr(t);
  const double x = static_cast<double>(t);
  return snr * ((x - params.mu) / (params.sigma * params.sigma)) *
         normal_pdf(x, params.mu, params.sigma);
}

double truncated_contribution_dmu(const NormalParams& params, const Schedule& schedule,
                                  Timestep t, double step) {
  const int T = schedule.T();
  const auto up = TimestepPMF::build({params.mu + step, params.sigma}, T);
  const auto down = TimestepPMF::build({params.mu - step, params.sigma}, T);
  return schedule.snr(t) * (up.prob(t) - down.prob(t)) / (2.0 * step);
}

double total_gradient_proxy(const TimestepPMF& pmf, const Schedule& schedule) {
  require_same_horizon(pmf, schedule);
  const auto probs = pmf.probs();
  const auto snrs = schedule.snrs();
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) total += probs[i] * snrs[i];
  return total;
}

ContributionProfile region_split(const TimestepPMF& pmf, const Schedule& schedule,
                                 double tau) {
  require_same_horizon(pmf, schedule);
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw InvalidArgument("region_split: tau must be a positive finite number");

  ContributionProfile profile;
  profile.T = pmf.T();
  profile.tau = tau;
  profile.contributions.resize(static_cast<std::size_t>(profile.T));
  const auto probs = pmf.probs();
  const auto snrs = schedule.snrs();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double c = probs[i] * snrs[i];
    profile.contributions[i] = c;
    if (snrs[i] >= tau) {
      profile.high_region_mass += c;
    } else {
      profile.low_region_mass += c;
    }
    profile.total += c;
  }
  return profile;
}

}  // namespace dgate
