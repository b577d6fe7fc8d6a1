#pragma once
#include <json.hpp>
#include <span>

namespace dlmc {

// Least-squares power-law fit value ~ exp(intercept) * k^slope, computed on
// (log k, log value) over the post-burn-in window.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  long long k_min = 0;
  long long k_max = 0;
};

// Drops floor(burn_in * n) leading points, then fits the rest. Requires at
// least 5 surviving points with k > 0 and value > 0.
RateFit fit_rate(std::span<const long long> k, std::span<const double> value, double burn_in);

void to_json(nlohmann::json& j, const RateFit& fit);

}  // namespace dlmc
