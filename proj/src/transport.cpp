#include "dlmc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dlmc {

namespace {

constexpr double kSqrtClamp = 1e-14;

// Symmetric PSD square root with eigenvalue clamping; accumulates the
// negative mass that was clamped away.
Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& S, double& clamped) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw std::runtime_error("sym_sqrt: eigensolver failed");
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < kSqrtClamp) {
      if (ev(i) < 0.0) clamped += -ev(i);
      ev(i) = kSqrtClamp;
    }
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

// Shortest-augmenting-path assignment (Jonker-Volgenant style) with dual
// potentials; exact for dense double costs, O(n^3).
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost, double& total_cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw std::invalid_argument("solve_assignment: cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0);  // match[j] = row assigned to column j (1-based)
  std::vector<int> way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> rowsol(n, -1);
  total_cost = 0.0;
  for (int j = 1; j <= n; ++j) {
    if (match[j]) {
      rowsol[match[j] - 1] = j - 1;
      total_cost += cost(match[j] - 1, j - 1);
    }
  }
  return rowsol;
}

double w2_gaussian(const GaussianLaw& a, const GaussianLaw& b) {
  return w2_gaussian_detail(a, b).value;
}

W2GaussianDetail w2_gaussian_detail(const GaussianLaw& a, const GaussianLaw& b) {
  if (a.dimension() != b.dimension())
    throw std::invalid_argument("w2_gaussian: dimension mismatch");
  W2GaussianDetail out;
  const Eigen::MatrixXd rb = sym_sqrt(b.covariance, out.clamped_mass);
  const Eigen::MatrixXd cross = sym_sqrt(rb * a.covariance * rb, out.clamped_mass);
  const double bures =
      a.covariance.trace() + b.covariance.trace() - 2.0 * cross.trace();
  const double sq = (a.mean - b.mean).squaredNorm() + std::max(bures, 0.0);
  out.value = std::sqrt(sq);
  return out;
}

double w2_gaussian_moments(const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a,
                           const Eigen::VectorXd& mean_b, const Eigen::MatrixXd& cov_b) {
  if (mean_a.size() != mean_b.size())
    throw std::invalid_argument("w2_gaussian_moments: dimension mismatch");
  double clamped = 0.0;
  const Eigen::MatrixXd rb = sym_sqrt(cov_b, clamped);
  const Eigen::MatrixXd cross = sym_sqrt(rb * cov_a * rb, clamped);
  const double bures = cov_a.trace() + cov_b.trace() - 2.0 * cross.trace();
  return std::sqrt((mean_a - mean_b).squaredNorm() + std::max(bures, 0.0));
}

TransportPlan w2_empirical_exact(const EmpiricalCloud& a, const EmpiricalCloud& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("w2_empirical_exact: clouds must have equal sizes");
  if (a.size() < 1) throw std::invalid_argument("w2_empirical_exact: empty clouds");
  if (a.size() > 4096) throw std::invalid_argument("w2_empirical_exact: n exceeds 4096");
  if (a.dimension() != b.dimension())
    throw std::invalid_argument("w2_empirical_exact: dimension mismatch");

  const int n = a.size();
  Eigen::MatrixXd cost(n, n);
  for (int i = 0; i < n; ++i)
    cost.row(i) = (b.points.rowwise() - a.points.row(i)).rowwise().squaredNorm().transpose();

  TransportPlan plan;
  double total = 0.0;
  plan.assignment = solve_assignment(cost, total);
  plan.cost = total / n;
  return plan;
}

double w2_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || a.size() != b.size())
    throw std::invalid_argument("w2_1d: inputs must be nonempty and of equal length");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double sq = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sq += diff * diff;
  }
  return std::sqrt(sq / static_cast<double>(a.size()));
}

double consensus_energy(const Eigen::MatrixXd& X) {
  return row_deviations(X).squaredNorm();
}

Eigen::MatrixXd row_deviations(const Eigen::MatrixXd& X) {
  const Eigen::RowVectorXd mean = X.colwise().mean();
  return X.rowwise() - mean;
}

double w2_to_dirac(const EmpiricalCloud& a) {
  if (a.size() < 1) throw std::invalid_argument("w2_to_dirac: empty cloud");
  return std::sqrt(a.points.squaredNorm() / static_cast<double>(a.size()));
}

EmpiricalCloud cloud_from_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cloud_from_csv: cannot open " + file.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (!rows.empty() && vals.size() != rows.front().size())
      throw std::runtime_error("cloud_from_csv: ragged rows");
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error("cloud_from_csv: empty file");
  EmpiricalCloud cloud;
  cloud.points.resize(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) cloud.points(i, j) = rows[i][j];
  return cloud;
}

void cloud_to_csv(const EmpiricalCloud& cloud, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cloud_to_csv: cannot open " + file.string());
  out.precision(17);
  for (int i = 0; i < cloud.size(); ++i) {
    for (int j = 0; j < cloud.dimension(); ++j) {
      if (j) out << ',';
      out << cloud.points(i, j);
    }
    out << '\n';
  }
}

void to_json(nlohmann::json& j, const TransportPlan& plan) {
  j = nlohmann::json{{"assignment", plan.assignment}, {"cost", plan.cost}, {"w2", plan.w2()}};
}

}  // namespace dlmc
