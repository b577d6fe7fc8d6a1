#include "dlmc/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dlmc {

RateFit fit_rate(std::span<const long long> k, std::span<const double> value, double burn_in) {
  if (k.size() != value.size()) throw std::invalid_argument("fit_rate: length mismatch");
  if (!(burn_in >= 0.0 && burn_in <= 0.9))
    throw std::invalid_argument("fit_rate: burn_in must lie in [0, 0.9]");
  const size_t skip = static_cast<size_t>(std::floor(burn_in * static_cast<double>(k.size())));
  if (k.size() - skip < 5) throw std::invalid_argument("fit_rate: fewer than 5 points after burn-in");

  std::vector<double> xs, ys;
  xs.reserve(k.size() - skip);
  for (size_t i = skip; i < k.size(); ++i) {
    if (k[i] <= 0) throw std::invalid_argument("fit_rate: window contains k <= 0");
    if (!(value[i] > 0.0))
      throw std::invalid_argument("fit_rate: window contains a non-positive value");
    xs.push_back(std::log(static_cast<double>(k[i])));
    ys.push_back(std::log(value[i]));
  }

  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: window has a single distinct k");

  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.k_min = k[skip];
  fit.k_max = k[k.size() - 1];
  return fit;
}

void to_json(nlohmann::json& j, const RateFit& fit) {
  j = nlohmann::json{{"slope", fit.slope},
                     {"intercept", fit.intercept},
                     {"r_squared", fit.r_squared},
                     {"window", {fit.k_min, fit.k_max}}};
}

}  // namespace dlmc
