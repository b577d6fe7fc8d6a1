#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "dlmc/dynamics.hpp"
#include "dlmc/fit.hpp"
#include "dlmc/mixing.hpp"
#include "dlmc/potential.hpp"
#include "dlmc/schedule.hpp"
#include "dlmc/theory.hpp"
#include "dlmc/transport.hpp"

namespace dlmc {

struct TopologySpec {
  std::string kind = "ring";  // ring|path|complete|star|grid2d|erdos_renyi|single|file
  int m = 4;
  double edge_prob = 0.3;
  std::uint64_t seed = 1;
  int rows = 0;
  int retries = 64;
  double lazy_theta = 1.0;  // < 1 applies a lazy mix after construction
  std::string path;         // kind == "file": mixing-system JSON
};

struct PotentialSpec {
  std::string kind = "quadratic";  // quadratic|logistic|zero
  nlohmann::json inline_spec;      // quadratic: {"components":[{"A":..,"b":..},..]}
  std::string file;                // quadratic: JSON path (alternative to inline)
  std::string csv;                 // logistic: data path
  double ridge = 0.1;              // logistic
  int dimension = 1;               // zero potential
};

struct InitSpec {
  std::string kind = "gaussian";  // gaussian|rows
  std::vector<double> mean;       // gaussian: common center (zeros if empty)
  double spread = 1.0;            // gaussian: entrywise standard deviation
  std::vector<std::vector<double>> rows;  // rows: explicit m x d block
};

struct FineSdeSpec {
  bool enabled = false;
  double dt = 1e-3;
  double horizon = 0.0;  // 0: run 1.05x the consensus time bound
  double epsilon = 1e-2;
  int record_every = 1;
};

// Full experiment description. Everything is overridable from the CLI and
// the effective values are echoed into the output directory.
struct ExperimentConfig {
  TopologySpec topology;
  PotentialSpec potential;

  std::string h_policy = "constant";  // constant|inverse_k
  double h = 0.1;
  long long h_gate = 0;  // inverse_k; 0 = ceil((L+m)/2)-1, clamped to >= 2
  std::string alpha_policy = "paper";  // paper|constant
  double sigma = 1.0;

  long long steps = 10000;
  int replicas = 1;
  std::uint64_t seed = 1;
  int checkpoints_per_decade = 40;
  double burn_in = 0.2;
  InitSpec init;
  std::string out;  // output directory; empty = no files written

  FineSdeSpec fine_sde;
  int empirical_every = 8;        // checkpoint stride for the empirical-W2 estimate
  int empirical_max_points = 512; // cloud downsampling cap for exact assignment
  std::string convergence_mode = "auto";  // auto|ground_truth|self
  double bounds_eps = 1e-2;
  std::optional<double> f0_override;
  bool write_trajectories = true;
  int threads = 0;  // 0 = hardware concurrency
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& file);

// A config materialized into runnable parts.
struct Instance {
  MixingSystem sys;
  PotentialEnsemble ens;
  Schedule sched;
  double f0 = 0.0;  // E of the initial consensus energy
};

Instance build_instance(const ExperimentConfig& cfg);

// Initial m x d block for one replica (gaussian inits differ per replica).
Eigen::MatrixXd initial_state(const Instance& inst, const ExperimentConfig& cfg, int replica);

// Bound inputs assembled from the instance (beta_bar requires m >= 2 and is
// NaN for a single agent).
BoundInputs bound_inputs(const Instance& inst, const ExperimentConfig& cfg);

std::vector<long long> build_checkpoints(long long steps, int per_decade);

struct SpectraReport {
  nlohmann::json report;
  bool assumption_holds = false;
};
SpectraReport cmd_spectra(const ExperimentConfig& cfg);

struct ConsensusResult {
  std::vector<long long> ks;
  std::vector<double> ts;
  std::vector<double> mean_energy;  // replica mean of the consensus energy
  std::vector<double> dirac_w2;     // pooled deviation-cloud W2 to the origin Dirac
  std::optional<RateFit> energy_fit;
  bool dirac_monotone_tail = false;  // nonincreasing over the last 10 checkpoints, 5% slack

  // fine-SDE mode
  std::optional<double> first_passage_time;
  std::optional<double> time_bound;
  std::optional<bool> within_bound;
  std::vector<double> fine_times;
  std::vector<double> fine_mean_energy;

  nlohmann::json summary;
  int exit_hint = 0;
};
ConsensusResult cmd_consensus(const ExperimentConfig& cfg);

struct ConvergenceResult {
  std::vector<long long> ks;
  std::vector<double> ts;
  std::vector<double> w2_gauss;      // per-checkpoint Gaussian-moment W2 to the target
  std::vector<double> w2_empirical;  // NaN where not evaluated
  std::vector<double> theory_curve;  // recursion bound at the checkpoints
  std::optional<RateFit> w2_fit;     // diminishing-step slope fit

  Eigen::VectorXd plateau_mean;  // pooled post-burn-in replica moments
  Eigen::MatrixXd plateau_cov;
  double plateau_w2_vs_target = 0.0;
  std::optional<double> limit_bound;  // absent when its preconditions fail
  Eigen::VectorXd target_mean;
  Eigen::MatrixXd target_cov;

  nlohmann::json summary;
  int exit_hint = 0;
};
ConvergenceResult cmd_convergence(const ExperimentConfig& cfg);

struct BoundsReport {
  nlohmann::json report;
  int exit_hint = 0;  // 4 when some bound was vacuous
};
BoundsReport cmd_bounds(const ExperimentConfig& cfg);

}  // namespace dlmc
