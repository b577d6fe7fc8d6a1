#include "dlmc/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dlmc {

namespace {

constexpr double kStructuralTol = 1e-12;

std::string ij(int i, int j) {
  std::ostringstream os;
  os << "(" << i << "," << j << ")";
  return os.str();
}

}  // namespace

void validate(const MixingSystem& sys) {
  const int m = sys.size();
  const Eigen::MatrixXd& W = sys.weights;
  if (W.rows() != m || W.cols() != m)
    throw std::runtime_error("mixing: weight matrix shape does not match graph");

  std::set<std::pair<int, int>> edge_set(sys.graph.edges.begin(), sys.graph.edges.end());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (std::abs(W(i, j) - W(j, i)) > kStructuralTol)
        throw std::runtime_error("mixing: W not symmetric at " + ij(i, j));
      if (i != j && W(i, j) != 0.0) {
        auto e = std::minmax(i, j);
        if (!edge_set.count({e.first, e.second}))
          throw std::runtime_error("mixing: nonzero weight off the edge set at " + ij(i, j));
      }
    }
    if (std::abs(W.row(i).sum() - 1.0) > kStructuralTol)
      throw std::runtime_error("mixing: row " + std::to_string(i) + " does not sum to 1");
    if (std::abs(W.col(i).sum() - 1.0) > kStructuralTol)
      throw std::runtime_error("mixing: column " + std::to_string(i) + " does not sum to 1");
  }

  const Eigen::VectorXd& ev = sys.w_spectrum;
  if (ev.size() != m) throw std::runtime_error("mixing: spectrum not computed");
  if (ev(0) <= -1.0 - kZeroEigTolerance || ev(m - 1) > 1.0 + kZeroEigTolerance)
    throw std::runtime_error("mixing: eigenvalue outside (-1, 1]");
  if (sys.graph.connected()) {
    if (std::abs(ev(m - 1) - 1.0) > kZeroEigTolerance)
      throw std::runtime_error("mixing: top eigenvalue is not 1");
    if (m >= 2) {
      if (ev(m - 2) >= 1.0 - kZeroEigTolerance)
        throw std::runtime_error("mixing: unit eigenvalue is not simple on a connected graph");
      if (!(sys.beta < 1.0))
        throw std::runtime_error("mixing: beta >= 1");
      if (!(sys.beta_bar > 0.0))
        throw std::runtime_error("mixing: beta_bar <= 0");
    }
  }
}

MixingSystem mixing_from_weights(Graph graph, Eigen::MatrixXd weights) {
  MixingSystem sys;
  sys.graph = std::move(graph);
  sys.weights = std::move(weights);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sys.weights, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("mixing: eigensolver failed");
  sys.w_spectrum = solver.eigenvalues();  // ascending
  const int m = sys.size();
  sys.laplacian_spectrum.resize(m);
  for (int i = 0; i < m; ++i) sys.laplacian_spectrum(i) = 1.0 - sys.w_spectrum(m - 1 - i);

  if (m >= 2) {
    sys.beta = sys.w_spectrum(m - 2);
    double smallest_nonzero = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < m; ++i) {
      if (sys.laplacian_spectrum(i) > kZeroEigTolerance) {
        smallest_nonzero = sys.laplacian_spectrum(i);
        break;
      }
    }
    sys.beta_bar = smallest_nonzero;
  }
  validate(sys);
  return sys;
}

MixingSystem metropolis_weights(const Graph& g) {
  if (!g.connected()) throw std::runtime_error("metropolis_weights: graph is not connected");
  const int m = g.vertex_count;
  const std::vector<int> deg = g.degrees();
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(m, m);
  for (auto [i, j] : g.edges) {
    const double w = 1.0 / (1.0 + std::max(deg[i], deg[j]));
    W(i, j) = w;
    W(j, i) = w;
  }
  for (int i = 0; i < m; ++i) W(i, i) = 1.0 - W.row(i).sum();
  return mixing_from_weights(g, std::move(W));
}

MixingSystem lazy_mix(const MixingSystem& sys, double theta) {
  if (!(theta > 0.0 && theta <= 1.0))
    throw std::invalid_argument("lazy_mix: theta must lie in (0,1]");
  const int m = sys.size();
  Eigen::MatrixXd W = theta * sys.weights + (1.0 - theta) * Eigen::MatrixXd::Identity(m, m);
  return mixing_from_weights(sys.graph, std::move(W));
}

SpectralSummary spectral_summary(const MixingSystem& sys) {
  const int m = sys.size();
  if (m < 2 || sys.laplacian_spectrum.lpNorm<Eigen::Infinity>() <= kZeroEigTolerance)
    throw std::runtime_error("spectral_summary: degenerate network (all-zero Laplacian spectrum)");
  return SpectralSummary{sys.beta, sys.beta_bar, sys.laplacian_spectrum(1)};
}

Eigen::MatrixXd laplacian_apply(const MixingSystem& sys, const Eigen::MatrixXd& X) {
  if (X.rows() != sys.size())
    throw std::invalid_argument("laplacian_apply: X must have one row per vertex");
  return X - sys.weights * X;
}

MixingSystem single_agent_system() {
  return mixing_from_weights(make_graph(1, {}), Eigen::MatrixXd::Ones(1, 1));
}

void to_json(nlohmann::json& j, const MixingSystem& sys) {
  nlohmann::json triplets = nlohmann::json::array();
  const int m = sys.size();
  for (int i = 0; i < m; ++i)
    for (int k = i; k < m; ++k)
      if (sys.weights(i, k) != 0.0) triplets.push_back({i, k, sys.weights(i, k)});
  std::vector<double> wspec(sys.w_spectrum.data(), sys.w_spectrum.data() + m);
  std::vector<double> lspec(sys.laplacian_spectrum.data(), sys.laplacian_spectrum.data() + m);
  j = nlohmann::json{
      {"graph", sys.graph},
      {"weights", triplets},
      {"spectral", {{"beta", sys.beta},
                    {"beta_bar", sys.beta_bar},
                    {"w_spectrum", wspec},
                    {"laplacian_spectrum", lspec},
                    {"zero_eigenvalue_tolerance", kZeroEigTolerance}}}};
}

void from_json(const nlohmann::json& j, MixingSystem& sys) {
  Graph g = j.at("graph").get<Graph>();
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(g.vertex_count, g.vertex_count);
  for (const auto& t : j.at("weights")) {
    const int a = t.at(0).get<int>();
    const int b = t.at(1).get<int>();
    const double w = t.at(2).get<double>();
    W(a, b) = w;
    W(b, a) = w;
  }
  sys = mixing_from_weights(std::move(g), std::move(W));
}

}  // namespace dlmc
