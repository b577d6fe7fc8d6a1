#pragma once
#include <Eigen/Dense>
#include <json.hpp>
#include <limits>

#include "dlmc/graph.hpp"

namespace dlmc {

// Tolerance below which a Laplacian eigenvalue counts as zero. Fixed;
// echoed in the spectra report.
inline constexpr double kZeroEigTolerance = 1e-10;

// A graph together with a symmetric doubly stochastic gossip matrix W,
// the spectra of W and of L = I - W, and the two scalars every rate bound
// consumes: beta (second-largest eigenvalue of W) and beta_bar (smallest
// nonzero eigenvalue of L). For a single vertex both scalars are undefined
// and stored as NaN.
struct MixingSystem {
  Graph graph;
  Eigen::MatrixXd weights;             // W, m x m dense
  Eigen::VectorXd w_spectrum;          // eigenvalues of W, ascending
  Eigen::VectorXd laplacian_spectrum;  // eigenvalues of I - W, ascending
  double beta = std::numeric_limits<double>::quiet_NaN();
  double beta_bar = std::numeric_limits<double>::quiet_NaN();

  int size() const { return graph.vertex_count; }
};

// Builds a MixingSystem from an explicit weight matrix: computes the
// spectra via a dense symmetric eigensolver and checks every invariant
// (symmetry, double stochasticity, sparsity pattern, spectrum in (-1,1]
// with a simple unit eigenvalue when connected).
MixingSystem mixing_from_weights(Graph graph, Eigen::MatrixXd weights);

// Throws std::runtime_error naming the first violated invariant.
void validate(const MixingSystem& sys);

// Metropolis-Hastings weights: W_ij = 1/(1+max(deg_i,deg_j)) on edges,
// diagonal fills the row to 1. Requires a connected graph.
MixingSystem metropolis_weights(const Graph& g);

// theta*W + (1-theta)*I, theta in (0,1]. Maps each eigenvalue to
// theta*lambda + 1 - theta; theta = 1/2 guarantees a nonnegative spectrum.
MixingSystem lazy_mix(const MixingSystem& sys, double theta);

struct SpectralSummary {
  double beta;       // second-largest eigenvalue of W
  double beta_bar;   // smallest nonzero eigenvalue of L
  double lambda2_L;  // second-smallest eigenvalue of L
};

// Fails for the degenerate single-vertex system (all-zero Laplacian
// spectrum).
SpectralSummary spectral_summary(const MixingSystem& sys);

// (I - W) X = X - W X for an m x d state block. The result has zero
// column means because W is doubly stochastic.
Eigen::MatrixXd laplacian_apply(const MixingSystem& sys, const Eigen::MatrixXd& X);

// Trivial m = 1 system (W = [1]); used for single-chain runs where the
// network terms cancel. spectral_summary rejects it.
MixingSystem single_agent_system();

void to_json(nlohmann::json& j, const MixingSystem& sys);
// Rebuilds from vertex count, edge list and weight triplets; the spectrum
// is recomputed, not trusted from the file.
void from_json(const nlohmann::json& j, MixingSystem& sys);

}  // namespace dlmc
