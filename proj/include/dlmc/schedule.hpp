#pragma once
#include <algorithm>
#include <stdexcept>
#include <string>

namespace dlmc {

// Step-size and annealing policies for the discrete update from X_k to
// X_{k+1}: the mixing/gradient step h and the annealing weight alpha, plus
// the temperature sigma.
//
// Policies:
//   h:      Constant h in (0,1), or InverseK h = 1/max(k+1, gate) with
//           gate >= 2 so every step stays below 1.
//   alpha:  Paper alpha_j = 1/(1+j) (the update at step k uses index
//           j = k+1, i.e. 1/(2+k)), or One (no annealing).
// sigma = 0 disables the noise term; used by deterministic diagnostics.
struct Schedule {
  enum class HPolicy { Constant, InverseK };
  enum class AlphaPolicy { Paper, One };

  HPolicy h_policy = HPolicy::Constant;
  double h_value = 0.1;          // Constant policy
  long long inverse_gate = 2;    // InverseK policy
  AlphaPolicy alpha_policy = AlphaPolicy::Paper;
  double sigma = 1.0;

  // Step size used going from X_k to X_{k+1}.
  double h_at(long long k) const {
    if (h_policy == HPolicy::Constant) return h_value;
    return 1.0 / static_cast<double>(std::max(k + 1, inverse_gate));
  }

  // Annealing weight alpha_j.
  double alpha_at(long long j) const {
    if (alpha_policy == AlphaPolicy::One) return 1.0;
    return 1.0 / (1.0 + static_cast<double>(j));
  }

  void validate() const {
    if (h_policy == HPolicy::Constant && !(h_value > 0.0 && h_value < 1.0))
      throw std::invalid_argument("schedule: constant h must lie in (0,1)");
    if (h_policy == HPolicy::InverseK && inverse_gate < 2)
      throw std::invalid_argument("schedule: inverse_k gate must be >= 2");
    if (!(sigma >= 0.0)) throw std::invalid_argument("schedule: sigma must be >= 0");
  }
};

inline Schedule constant_schedule(double h, double sigma,
                                  Schedule::AlphaPolicy alpha = Schedule::AlphaPolicy::Paper) {
  Schedule s;
  s.h_policy = Schedule::HPolicy::Constant;
  s.h_value = h;
  s.alpha_policy = alpha;
  s.sigma = sigma;
  s.validate();
  return s;
}

inline Schedule inverse_k_schedule(long long gate, double sigma,
                                   Schedule::AlphaPolicy alpha = Schedule::AlphaPolicy::Paper) {
  Schedule s;
  s.h_policy = Schedule::HPolicy::InverseK;
  s.inverse_gate = gate;
  s.alpha_policy = alpha;
  s.sigma = sigma;
  s.validate();
  return s;
}

}  // namespace dlmc
