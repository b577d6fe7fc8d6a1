#pragma once
#include <json.hpp>
#include <string>
#include <vector>

#include "dlmc/mixing.hpp"
#include "dlmc/schedule.hpp"

namespace dlmc {

// Constant in the single-step W2 contraction bound.
inline const double kChi = 7.0 * std::sqrt(2.0) / 6.0;

// Everything the closed-form bounds consume.
struct BoundInputs {
  double beta_bar = 0.0;  // smallest nonzero Laplacian eigenvalue
  double sigma = 0.0;     // temperature
  double L_lip = 0.0;     // gradient Lipschitz constant of U
  double m_strong = 0.0;  // strong convexity constant of U
  int d = 1;              // state dimension
  double h = 0.0;         // step size (constant policy)
  double f0 = 0.0;        // E of the initial consensus energy
  double alpha0 = 1.0;    // annealing weight at time zero
  double chi = kChi;
};

// Upper bound on the expected first time at which the mean consensus
// energy drops below eps:
//   (2/(beta_bar-sigma)) [ -log eps
//     + (f0 + sigma log(2L/beta_bar)) e^{(alpha0 L - beta_bar)(2L/beta_bar - 1)}
//     + 2L/beta_bar - 1 ].
// Requires sigma < beta_bar; otherwise the bound is vacuous and a
// VacuousBoundError is thrown.
double consensus_time_bound(const BoundInputs& in, double eps);

// Limiting W2 gap of the constant-step chain: chi L sqrt(h d) / m_strong.
// Requires h < min(1/L, m_strong) (thrown as VacuousBoundError naming the
// violated inequality otherwise).
double w2_limit_bound(const BoundInputs& in);

// Per-step contraction factor max(1 - m h, L h - 1).
double contraction_rho(const BoundInputs& in, double h);

struct RecursionCurve {
  std::vector<double> values;  // w_0 .. w_K
  bool contracting = true;     // false if any rho_k >= 1 was encountered
};

// Iterates w_{k+1} = rho_{k+1} w_k + chi L sqrt(h_{k+1}^3 d) + L h_{k+1} alpha_{k+1}
// with alpha_j = 1/(1+j) and h from the schedule's step policy; the theory
// overlay for the convergence experiments.
RecursionCurve w2_recursion_curve(const BoundInputs& in, double w0, long long K,
                                  const Schedule& h_policy);

struct RecurrenceCurve {
  std::vector<double> u;                // u_1 .. u_K
  std::vector<double> normalized_tail;  // u_k * k^exponent
  double exponent = 0.0;
};

// Equality iteration of u_{k+1} = (1 - c/k^s) u_k + d/k^t from k = 1;
// normalized tail u_k k^{t-s} approaches d/c. Requires 0 < s < 1, s < t,
// c, d > 0.
RecurrenceCurve polyak_recurrence_25(double c, double d, double s, double t, double u0,
                                     long long K);

// Equality iteration of u_{k+1} = (1 - c/k) u_k + d/k^{p+1} from k = 1;
// normalized tail u_k k^p approaches d/(c-p). Requires d > 0, p > 0, c > p.
RecurrenceCurve polyak_recurrence_24(double c, double d, double p, double u0, long long K);

struct StabilityCheck {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // positive iff the condition holds
};

struct StabilityReport {
  std::vector<StabilityCheck> checks;
  double rho = 0.0;         // contraction factor at the evaluated step
  double h_evaluated = 0.0;  // step the gates were evaluated at (first step)

  bool all_pass() const;
};

// Pass/fail with margins for every standing condition: sigma < beta_bar,
// h < 1/L, h < m, beta < 1, rho < 1. Pure diagnostics; for a diminishing
// step policy the gates are evaluated at the first step.
StabilityReport stability_report(const BoundInputs& in, const MixingSystem& sys,
                                 const Schedule& sched);

void to_json(nlohmann::json& j, const StabilityReport& report);
void to_json(nlohmann::json& j, const BoundInputs& in);

}  // namespace dlmc
