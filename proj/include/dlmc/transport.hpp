#pragma once
#include <Eigen/Dense>
#include <filesystem>
#include <json.hpp>
#include <vector>

#include "dlmc/potential.hpp"

namespace dlmc {

// Uniformly weighted point cloud, one point per row.
struct EmpiricalCloud {
  Eigen::MatrixXd points;

  int size() const { return static_cast<int>(points.rows()); }
  int dimension() const { return static_cast<int>(points.cols()); }
};

// Optimal matching between two equal-size uniform clouds. cost is the mean
// squared distance under the assignment, so W2 = sqrt(cost).
struct TransportPlan {
  std::vector<int> assignment;  // point i of a -> point assignment[i] of b
  double cost = 0.0;

  double w2() const { return std::sqrt(cost); }
};

// Exact minimum-cost assignment (shortest augmenting path) on a dense cost
// matrix; returns the row-to-column map and writes the total cost.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost, double& total_cost);

// Closed-form W2 between Gaussians:
//   sqrt(||mu_a-mu_b||^2 + tr(Sa + Sb - 2 (Sb^{1/2} Sa Sb^{1/2})^{1/2})).
// Matrix square roots go through symmetric eigendecompositions with
// eigenvalues clamped at 1e-14 to absorb roundoff; the clamped mass is
// reported in the detail variant.
double w2_gaussian(const GaussianLaw& a, const GaussianLaw& b);

struct W2GaussianDetail {
  double value = 0.0;
  double clamped_mass = 0.0;  // total negative mass removed by clamping
};
W2GaussianDetail w2_gaussian_detail(const GaussianLaw& a, const GaussianLaw& b);

// Same formula on raw moments; tolerates merely PSD covariances (degenerate
// sample clouds), unlike the GaussianLaw-typed overload.
double w2_gaussian_moments(const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a,
                           const Eigen::VectorXd& mean_b, const Eigen::MatrixXd& cov_b);

// Exact empirical W2 via the assignment problem on squared distances.
// Requires equal sizes, n <= 4096; unequal-size comparisons must be
// downsampled by the caller.
TransportPlan w2_empirical_exact(const EmpiricalCloud& a, const EmpiricalCloud& b);

// One-dimensional exact W2: match order statistics.
double w2_1d(std::vector<double> a, std::vector<double> b);

// ||X - 1 xbar'||_F^2, the squared deviation of all rows from their mean.
double consensus_energy(const Eigen::MatrixXd& X);

// X minus its row mean replicated; the deviation cloud used by the
// consensus diagnostics.
Eigen::MatrixXd row_deviations(const Eigen::MatrixXd& X);

// W2 to the point mass at the origin: sqrt(mean ||x||^2). Exact, since the
// only coupling against a Dirac is the product coupling.
double w2_to_dirac(const EmpiricalCloud& a);

EmpiricalCloud cloud_from_csv(const std::filesystem::path& file);
void cloud_to_csv(const EmpiricalCloud& cloud, const std::filesystem::path& file);
void to_json(nlohmann::json& j, const TransportPlan& plan);

}  // namespace dlmc
