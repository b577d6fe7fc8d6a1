#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <optional>
#include <vector>

#include "dlmc/rng.hpp"

namespace dlmc {

// One agent's private potential term: value and analytic gradient.
struct Component {
  int dimension = 0;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

struct GaussianLaw {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // symmetric positive definite

  GaussianLaw() = default;
  GaussianLaw(Eigen::VectorXd mu, Eigen::MatrixXd cov);

  int dimension() const { return static_cast<int>(mean.size()); }
  // Same mean, covariance scaled by the temperature.
  GaussianLaw scaled(double sigma) const { return GaussianLaw(mean, sigma * covariance); }
};

// Sum-decomposed potential U(x) = sum_i u_i(x) with its regularity
// constants. m_strong/L_lip bound the curvature of the *sum* U. The
// dissimilarity constant G is only ever a sampled lower bound (see
// estimate_G); bounds that need it take it as an input. stationary_law
// (present for quadratics) is stored at unit temperature and rescaled
// through GaussianLaw::scaled at the point of use.
struct PotentialEnsemble {
  std::vector<Component> components;
  double m_strong = 0.0;
  double L_lip = 0.0;
  double G = 0.0;
  std::optional<Eigen::VectorXd> minimizer;
  std::optional<GaussianLaw> stationary_law;  // at sigma = 1

  int agents() const { return static_cast<int>(components.size()); }
  int dimension() const { return components.empty() ? 0 : components.front().dimension; }
};

// u_i(x) = x'A_i x / 2 - b_i'x with each A_i symmetric positive definite.
// U is quadratic with Hessian A = sum A_i; records minimizer A^{-1} sum b_i,
// extremal eigenvalues of A as (m_strong, L_lip) and the unit-temperature
// stationary law N(A^{-1} sum b_i, A^{-1}).
PotentialEnsemble quadratic_ensemble(const std::vector<Eigen::MatrixXd>& A_list,
                                     const std::vector<Eigen::VectorXd>& b_list);

struct LabeledDatum {
  double label = 0.0;  // -1 or +1
  Eigen::VectorXd features;
};
using Shard = std::vector<LabeledDatum>;

// u_i(x) = sum over shard_i of log(1+exp(-y a'x)) + (ridge/m)||x||^2/2.
// m_strong = ridge; L_lip = ridge + lambda_max(sum a a')/4 (the 1/4 curvature
// bound of the sigmoid). No closed-form stationary law.
PotentialEnsemble logistic_ensemble(const std::vector<Shard>& shards, double ridge);

// All-zero components; m_strong = L_lip = 0. Used for gradient-free
// consensus diagnostics where only the network terms act.
PotentialEnsemble zero_ensemble(int agents, int dimension);

// sum_i grad u_i(x).
Eigen::VectorXd grad_full(const PotentialEnsemble& ens, const Eigen::VectorXd& x);

// Row i = grad u_i(X.row(i)).
Eigen::MatrixXd grad_stacked(const PotentialEnsemble& ens, const Eigen::MatrixXd& X);

// Sampled lower bound on sup ||grad u_i(x) - grad u_j(y)|| / ||x - y||
// over i != j and x, y in the ball of the given radius around the minimizer
// (origin if unknown). Pairs closer than 1e-9 are skipped. Returns 0 for a
// single component.
double estimate_G(const PotentialEnsemble& ens, double radius, int samples, std::uint64_t seed);

// CSV rows "label,feature_1,...,feature_d" split into contiguous,
// near-equal shards; every agent must receive at least one row.
std::vector<Shard> shards_from_csv(const std::filesystem::path& file, int agents);

// {"components": [{"A": [[...]], "b": [...]}, ...]}
PotentialEnsemble quadratic_from_json(const nlohmann::json& spec);

}  // namespace dlmc
