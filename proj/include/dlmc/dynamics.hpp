#pragma once
#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "dlmc/mixing.hpp"
#include "dlmc/potential.hpp"
#include "dlmc/rng.hpp"
#include "dlmc/schedule.hpp"

namespace dlmc {

// Stacked agent iterate: row i holds agent i's d-dimensional state.
struct EnsembleState {
  Eigen::MatrixXd X;
  long long k = 0;
  double t = 0.0;  // accumulated sum of step sizes
};

// One step of the discretized coupled dynamics:
//   X_{k+1} = (1-h) X_k + h W X_k - alpha_{k+1} h grad_stacked(X_k)
//             + sqrt(2 sigma alpha_{k+1} h) Z_{k+1}
// with h = sched.h_at(k), alpha_{k+1} = sched.alpha_at(k+1), and Z_{k+1}
// the noise block at iteration index k+1. Throws DivergenceError if any
// entry leaves the finite range.
EnsembleState em_step(const EnsembleState& state, const MixingSystem& sys,
                      const PotentialEnsemble& ens, const Schedule& sched,
                      const NoiseStream& noise);

// Column mean of X (the network average).
Eigen::VectorXd average_state(const EnsembleState& state);

// Distance between the realized average update and the identity it must
// satisfy:
//   xbar_{k+1} = xbar_k - (alpha_{k+1} h / m) sum_i grad u_i(X_k^{(i)})
//                + sqrt(2 sigma alpha_{k+1} h) zbar_{k+1}
// with the noise regenerated from the stream. Requires next.k == prev.k+1.
double average_update_residual(const EnsembleState& prev, const EnsembleState& next,
                               const PotentialEnsemble& ens, const Schedule& sched,
                               const NoiseStream& noise);

// Called with the state after initialization (k = 0) and after every step.
using Observer = std::function<void(const EnsembleState&)>;

// Runs em_step `steps` times from the given initial block; returns full
// snapshots at the requested iteration indices (must be sorted, unique,
// within [0, steps]). Observers stream every state so memory stays
// O(m d + checkpoints).
std::vector<EnsembleState> simulate(const MixingSystem& sys, const PotentialEnsemble& ens,
                                    const Schedule& sched, Eigen::MatrixXd init, long long steps,
                                    std::span<const long long> checkpoints,
                                    const NoiseStream& noise,
                                    const std::vector<Observer>& observers = {});

// Time change for the 1/(1+t) annealing weight: S(t) = log(1+t) and its
// inverse T(s) = e^s - 1.
double time_change_forward(double t);
double time_change_inverse(double s);

struct FineSdeRecord {
  double t = 0.0;
  double consensus_energy = 0.0;
  Eigen::VectorXd xbar;
};

// Fine uniform-step integration of the continuous coupled dynamics
//   dX = -L X dt - alpha(t) grad dt + sqrt(2 sigma alpha(t)) dB,
// alpha(t) = 1/(1+t); used for the continuous-time consensus check.
// Requires dt <= 1e-2 and dt (1 + L_lip) < 1. Records every
// `record_every`-th step (the initial state always included).
std::vector<FineSdeRecord> sde_fine_approx(const MixingSystem& sys, const PotentialEnsemble& ens,
                                           double sigma, double horizon, double dt,
                                           Eigen::MatrixXd init, const NoiseStream& noise,
                                           int record_every = 1);

}  // namespace dlmc
