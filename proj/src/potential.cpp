#include "dlmc/potential.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dlmc {

namespace {

constexpr double kSymTol = 1e-12;

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

// d/dz log(1 + exp(z)) = 1/(1+exp(-z)).
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_spd(const Eigen::MatrixXd& A, int index) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("quadratic_ensemble: A_" + std::to_string(index) + " not square");
  if ((A - A.transpose()).lpNorm<Eigen::Infinity>() > kSymTol)
    throw std::runtime_error("quadratic_ensemble: A_" + std::to_string(index) + " not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) <= 0.0)
    throw std::runtime_error("quadratic_ensemble: A_" + std::to_string(index) +
                             " not positive definite");
}

}  // namespace

GaussianLaw::GaussianLaw(Eigen::VectorXd mu, Eigen::MatrixXd cov)
    : mean(std::move(mu)), covariance(std::move(cov)) {
  if (covariance.rows() != covariance.cols() || covariance.rows() != mean.size())
    throw std::invalid_argument("GaussianLaw: shape mismatch");
  if ((covariance - covariance.transpose()).lpNorm<Eigen::Infinity>() > kSymTol)
    throw std::runtime_error("GaussianLaw: covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) <= 0.0)
    throw std::runtime_error("GaussianLaw: covariance not positive definite");
}

PotentialEnsemble quadratic_ensemble(const std::vector<Eigen::MatrixXd>& A_list,
                                     const std::vector<Eigen::VectorXd>& b_list) {
  if (A_list.empty() || A_list.size() != b_list.size())
    throw std::invalid_argument("quadratic_ensemble: need equally many A and b, at least one");
  const int d = static_cast<int>(A_list.front().rows());

  Eigen::MatrixXd A_sum = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd b_sum = Eigen::VectorXd::Zero(d);
  PotentialEnsemble ens;
  for (size_t i = 0; i < A_list.size(); ++i) {
    check_spd(A_list[i], static_cast<int>(i));
    if (A_list[i].rows() != d || b_list[i].size() != d)
      throw std::invalid_argument("quadratic_ensemble: dimension mismatch");
    A_sum += A_list[i];
    b_sum += b_list[i];
    const Eigen::MatrixXd A = A_list[i];
    const Eigen::VectorXd b = b_list[i];
    Component c;
    c.dimension = d;
    c.value = [A, b](const Eigen::VectorXd& x) { return 0.5 * x.dot(A * x) - b.dot(x); };
    c.gradient = [A, b](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * x - b; };
    ens.components.push_back(std::move(c));
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A_sum);
  ens.m_strong = es.eigenvalues()(0);
  ens.L_lip = es.eigenvalues()(d - 1);
  const Eigen::VectorXd mu = A_sum.ldlt().solve(b_sum);
  ens.minimizer = mu;
  // Density exp(-U(x)) is Gaussian with covariance A^{-1}.
  Eigen::MatrixXd cov = es.eigenvectors() *
                        es.eigenvalues().cwiseInverse().asDiagonal() *
                        es.eigenvectors().transpose();
  cov = 0.5 * (cov + cov.transpose());
  ens.stationary_law = GaussianLaw(mu, std::move(cov));
  return ens;
}

PotentialEnsemble logistic_ensemble(const std::vector<Shard>& shards, double ridge) {
  if (shards.empty()) throw std::invalid_argument("logistic_ensemble: no shards");
  if (!(ridge > 0.0)) throw std::invalid_argument("logistic_ensemble: ridge must be > 0");
  int d = -1;
  for (const auto& shard : shards) {
    if (shard.empty()) throw std::runtime_error("logistic_ensemble: empty shard (every agent must own data)");
    for (const auto& datum : shard) {
      if (datum.label != 1.0 && datum.label != -1.0)
        throw std::invalid_argument("logistic_ensemble: labels must be -1 or +1");
      if (d < 0) d = static_cast<int>(datum.features.size());
      if (datum.features.size() != d)
        throw std::invalid_argument("logistic_ensemble: inconsistent feature dimension");
    }
  }

  const int m = static_cast<int>(shards.size());
  const double ridge_per_agent = ridge / m;
  PotentialEnsemble ens;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  for (const auto& shard : shards) {
    for (const auto& datum : shard) gram += datum.features * datum.features.transpose();
    Component c;
    c.dimension = d;
    c.value = [shard, ridge_per_agent](const Eigen::VectorXd& x) {
      double v = 0.5 * ridge_per_agent * x.squaredNorm();
      for (const auto& datum : shard) v += softplus(-datum.label * datum.features.dot(x));
      return v;
    };
    c.gradient = [shard, ridge_per_agent](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      Eigen::VectorXd g = ridge_per_agent * x;
      for (const auto& datum : shard)
        g -= datum.label * sigmoid(-datum.label * datum.features.dot(x)) * datum.features;
      return g;
    };
    ens.components.push_back(std::move(c));
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  ens.m_strong = ridge;
  ens.L_lip = ridge + 0.25 * es.eigenvalues()(d - 1);
  return ens;
}

PotentialEnsemble zero_ensemble(int agents, int dimension) {
  if (agents < 1 || dimension < 1) throw std::invalid_argument("zero_ensemble: bad shape");
  PotentialEnsemble ens;
  for (int i = 0; i < agents; ++i) {
    Component c;
    c.dimension = dimension;
    c.value = [](const Eigen::VectorXd&) { return 0.0; };
    c.gradient = [dimension](const Eigen::VectorXd&) -> Eigen::VectorXd {
      return Eigen::VectorXd::Zero(dimension);
    };
    ens.components.push_back(std::move(c));
  }
  return ens;
}

Eigen::VectorXd grad_full(const PotentialEnsemble& ens, const Eigen::VectorXd& x) {
  if (!x.allFinite()) throw std::runtime_error("grad_full: non-finite input");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(ens.dimension());
  for (const auto& c : ens.components) g += c.gradient(x);
  return g;
}

Eigen::MatrixXd grad_stacked(const PotentialEnsemble& ens, const Eigen::MatrixXd& X) {
  if (X.rows() != ens.agents())
    throw std::invalid_argument("grad_stacked: X must have one row per agent");
  Eigen::MatrixXd G(X.rows(), X.cols());
  for (int i = 0; i < X.rows(); ++i)
    G.row(i) = ens.components[i].gradient(X.row(i).transpose()).transpose();
  return G;
}

double estimate_G(const PotentialEnsemble& ens, double radius, int samples, std::uint64_t seed) {
  if (!(radius > 0.0) || samples < 1)
    throw std::invalid_argument("estimate_G: radius must be > 0 and samples >= 1");
  const int m = ens.agents();
  if (m == 1) return 0.0;  // no pairs to compare
  const int d = ens.dimension();
  const Eigen::VectorXd center =
      ens.minimizer ? *ens.minimizer : Eigen::VectorXd::Zero(d);

  NoiseStream stream(seed, 0);
  auto ball_point = [&](std::uint64_t s, std::uint64_t which) {
    // Gaussian direction scaled to a uniform radius in the ball.
    Eigen::VectorXd v(d);
    for (int c = 0; c < d; ++c) v(c) = stream.gaussian_at(s, which, static_cast<std::uint64_t>(c));
    const double norm = v.norm();
    const double u = stream.uniform_at(s, which, static_cast<std::uint64_t>(d));
    const double r = radius * std::pow(u, 1.0 / d);
    if (norm == 0.0) return center;
    return Eigen::VectorXd(center + (r / norm) * v);
  };

  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = ball_point(static_cast<std::uint64_t>(s), 0);
    const Eigen::VectorXd y = ball_point(static_cast<std::uint64_t>(s), 1);
    const double gap = (x - y).norm();
    if (gap < 1e-9) continue;
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd gi = ens.components[i].gradient(x);
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        const double ratio = (gi - ens.components[j].gradient(y)).norm() / gap;
        best = std::max(best, ratio);
      }
    }
  }
  return best;
}

std::vector<Shard> shards_from_csv(const std::filesystem::path& file, int agents) {
  if (agents < 1) throw std::invalid_argument("shards_from_csv: agents must be >= 1");
  std::ifstream in(file);
  if (!in) throw std::runtime_error("shards_from_csv: cannot open " + file.string());
  std::vector<LabeledDatum> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() < 2) throw std::runtime_error("shards_from_csv: row needs label and features");
    LabeledDatum datum;
    datum.label = vals[0];
    datum.features = Eigen::Map<Eigen::VectorXd>(vals.data() + 1, vals.size() - 1);
    rows.push_back(std::move(datum));
  }
  if (static_cast<int>(rows.size()) < agents)
    throw std::runtime_error("shards_from_csv: fewer rows than agents");
  // Contiguous near-equal split.
  std::vector<Shard> shards(agents);
  const size_t n = rows.size();
  size_t start = 0;
  for (int i = 0; i < agents; ++i) {
    const size_t stop = n * (i + 1) / agents;
    shards[i].assign(rows.begin() + start, rows.begin() + stop);
    start = stop;
  }
  return shards;
}

PotentialEnsemble quadratic_from_json(const nlohmann::json& spec) {
  std::vector<Eigen::MatrixXd> A_list;
  std::vector<Eigen::VectorXd> b_list;
  for (const auto& comp : spec.at("components")) {
    const auto rows = comp.at("A").get<std::vector<std::vector<double>>>();
    const int d = static_cast<int>(rows.size());
    Eigen::MatrixXd A(d, d);
    for (int i = 0; i < d; ++i) {
      if (static_cast<int>(rows[i].size()) != d)
        throw std::invalid_argument("quadratic_from_json: A is not square");
      for (int j = 0; j < d; ++j) A(i, j) = rows[i][j];
    }
    const auto bv = comp.at("b").get<std::vector<double>>();
    if (static_cast<int>(bv.size()) != d)
      throw std::invalid_argument("quadratic_from_json: b does not match A");
    b_list.push_back(Eigen::Map<const Eigen::VectorXd>(bv.data(), d));
    A_list.push_back(std::move(A));
  }
  return quadratic_ensemble(A_list, b_list);
}

}  // namespace dlmc
