#include "dlmc/theory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dlmc/errors.hpp"

namespace dlmc {

double consensus_time_bound(const BoundInputs& in, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("consensus_time_bound: eps must be > 0");
  if (!(in.sigma < in.beta_bar))
    throw VacuousBoundError("consensus_time_bound: requires sigma < beta_bar");
  if (!(in.L_lip > 0.0) || !(in.beta_bar > 0.0))
    throw std::invalid_argument("consensus_time_bound: L and beta_bar must be > 0");
  const double ratio = 2.0 * in.L_lip / in.beta_bar;
  const double transient = (in.f0 + in.sigma * std::log(ratio)) *
                           std::exp((in.alpha0 * in.L_lip - in.beta_bar) * (ratio - 1.0));
  return 2.0 / (in.beta_bar - in.sigma) * (-std::log(eps) + transient + ratio - 1.0);
}

double w2_limit_bound(const BoundInputs& in) {
  if (!(in.h < 1.0 / in.L_lip))
    throw VacuousBoundError("w2_limit_bound: requires h < 1/L");
  if (!(in.h < in.m_strong))
    throw VacuousBoundError("w2_limit_bound: requires h < m");
  return in.chi * in.L_lip * std::sqrt(in.h * in.d) / in.m_strong;
}

double contraction_rho(const BoundInputs& in, double h) {
  return std::max(1.0 - in.m_strong * h, in.L_lip * h - 1.0);
}

RecursionCurve w2_recursion_curve(const BoundInputs& in, double w0, long long K,
                                  const Schedule& h_policy) {
  if (w0 < 0.0) throw std::invalid_argument("w2_recursion_curve: w0 must be >= 0");
  if (K < 0) throw std::invalid_argument("w2_recursion_curve: K must be >= 0");
  RecursionCurve curve;
  curve.values.reserve(static_cast<size_t>(K) + 1);
  curve.values.push_back(w0);
  double w = w0;
  for (long long k = 0; k < K; ++k) {
    const double h = h_policy.h_at(k);
    const double alpha = 1.0 / (2.0 + static_cast<double>(k));
    const double rho = contraction_rho(in, h);
    if (rho >= 1.0) curve.contracting = false;
    w = rho * w + in.chi * in.L_lip * std::sqrt(h * h * h * in.d) + in.L_lip * h * alpha;
    curve.values.push_back(w);
  }
  return curve;
}

RecurrenceCurve polyak_recurrence_25(double c, double d, double s, double t, double u0,
                                     long long K) {
  if (!(s > 0.0 && s < 1.0 && s < t))
    throw std::invalid_argument("polyak_recurrence_25: need 0 < s < 1 and s < t");
  if (!(c > 0.0 && d > 0.0))
    throw std::invalid_argument("polyak_recurrence_25: need c > 0 and d > 0");
  if (u0 < 0.0) throw std::invalid_argument("polyak_recurrence_25: u0 must be >= 0");
  if (K < 1) throw std::invalid_argument("polyak_recurrence_25: K must be >= 1");

  RecurrenceCurve curve;
  curve.exponent = t - s;
  curve.u.resize(static_cast<size_t>(K));
  curve.normalized_tail.resize(static_cast<size_t>(K));
  double u = u0;
  curve.u[0] = u;
  curve.normalized_tail[0] = u;
  for (long long k = 1; k < K; ++k) {
    const double kd = static_cast<double>(k);
    u = (1.0 - c / std::pow(kd, s)) * u + d / std::pow(kd, t);
    curve.u[static_cast<size_t>(k)] = u;
    curve.normalized_tail[static_cast<size_t>(k)] = u * std::pow(kd + 1.0, t - s);
  }
  return curve;
}

RecurrenceCurve polyak_recurrence_24(double c, double d, double p, double u0, long long K) {
  if (!(d > 0.0 && p > 0.0 && c > p))
    throw std::invalid_argument("polyak_recurrence_24: need d > 0, p > 0 and c > p");
  if (u0 < 0.0) throw std::invalid_argument("polyak_recurrence_24: u0 must be >= 0");
  if (K < 1) throw std::invalid_argument("polyak_recurrence_24: K must be >= 1");

  RecurrenceCurve curve;
  curve.exponent = p;
  curve.u.resize(static_cast<size_t>(K));
  curve.normalized_tail.resize(static_cast<size_t>(K));
  double u = u0;
  curve.u[0] = u;
  curve.normalized_tail[0] = u;
  for (long long k = 1; k < K; ++k) {
    const double kd = static_cast<double>(k);
    u = (1.0 - c / kd) * u + d / std::pow(kd, p + 1.0);
    curve.u[static_cast<size_t>(k)] = u;
    curve.normalized_tail[static_cast<size_t>(k)] = u * std::pow(kd + 1.0, p);
  }
  return curve;
}

bool StabilityReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

StabilityReport stability_report(const BoundInputs& in, const MixingSystem& sys,
                                 const Schedule& sched) {
  StabilityReport report;
  report.h_evaluated = sched.h_at(0);
  report.rho = contraction_rho(in, report.h_evaluated);
  auto add = [&](const std::string& name, double margin) {
    report.checks.push_back(StabilityCheck{name, margin > 0.0, margin});
  };
  add("sigma < beta_bar", in.beta_bar - in.sigma);
  add("h < 1/L", (in.L_lip > 0.0 ? 1.0 / in.L_lip : std::numeric_limits<double>::infinity()) -
                     report.h_evaluated);
  add("h < m", in.m_strong - report.h_evaluated);
  add("beta < 1", 1.0 - sys.beta);
  add("rho < 1", 1.0 - report.rho);
  return report;
}

void to_json(nlohmann::json& j, const StabilityReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}});
  j = nlohmann::json{
      {"checks", checks}, {"rho", report.rho}, {"h_evaluated", report.h_evaluated},
      {"all_pass", report.all_pass()}};
}

void to_json(nlohmann::json& j, const BoundInputs& in) {
  j = nlohmann::json{{"beta_bar", in.beta_bar}, {"sigma", in.sigma},   {"L_lip", in.L_lip},
                     {"m_strong", in.m_strong}, {"d", in.d},           {"h", in.h},
                     {"f0", in.f0},             {"alpha0", in.alpha0}, {"chi", in.chi}};
}

}  // namespace dlmc
