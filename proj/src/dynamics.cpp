#include "dlmc/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "dlmc/errors.hpp"

namespace dlmc {

namespace {

void check_shapes(const EnsembleState& state, const MixingSystem& sys,
                  const PotentialEnsemble& ens) {
  if (state.X.rows() != sys.size())
    throw std::invalid_argument("em_step: state rows do not match network size");
  if (ens.agents() != sys.size())
    throw std::invalid_argument("em_step: ensemble size does not match network size");
  if (state.X.cols() != ens.dimension())
    throw std::invalid_argument("em_step: state columns do not match potential dimension");
}

}  // namespace

EnsembleState em_step(const EnsembleState& state, const MixingSystem& sys,
                      const PotentialEnsemble& ens, const Schedule& sched,
                      const NoiseStream& noise) {
  check_shapes(state, sys, ens);
  const double h = sched.h_at(state.k);
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("em_step: step size must lie in (0,1)");
  const double alpha = sched.alpha_at(state.k + 1);

  EnsembleState next;
  next.X = (1.0 - h) * state.X + h * (sys.weights * state.X) -
           (alpha * h) * grad_stacked(ens, state.X);
  if (sched.sigma > 0.0) {
    const double amp = std::sqrt(2.0 * sched.sigma * alpha * h);
    next.X += amp * noise.gaussian_matrix(static_cast<std::uint64_t>(state.k + 1), state.X.rows(),
                                          state.X.cols());
  }
  next.k = state.k + 1;
  next.t = state.t + h;
  if (!next.X.allFinite())
    throw DivergenceError(next.k, "em_step: non-finite state at iteration " +
                                      std::to_string(next.k));
  return next;
}

Eigen::VectorXd average_state(const EnsembleState& state) {
  return state.X.colwise().mean().transpose();
}

double average_update_residual(const EnsembleState& prev, const EnsembleState& next,
                               const PotentialEnsemble& ens, const Schedule& sched,
                               const NoiseStream& noise) {
  if (next.k != prev.k + 1)
    throw std::invalid_argument("average_update_residual: states are not consecutive");
  const int m = static_cast<int>(prev.X.rows());
  const double h = sched.h_at(prev.k);
  const double alpha = sched.alpha_at(prev.k + 1);

  const Eigen::VectorXd grad_sum =
      grad_stacked(ens, prev.X).colwise().sum().transpose();
  Eigen::VectorXd predicted = average_state(prev) - (alpha * h / m) * grad_sum;
  if (sched.sigma > 0.0) {
    const Eigen::MatrixXd z = noise.gaussian_matrix(static_cast<std::uint64_t>(prev.k + 1),
                                                    prev.X.rows(), prev.X.cols());
    predicted += std::sqrt(2.0 * sched.sigma * alpha * h) *
                 z.colwise().mean().transpose();
  }
  return (average_state(next) - predicted).norm();
}

std::vector<EnsembleState> simulate(const MixingSystem& sys, const PotentialEnsemble& ens,
                                    const Schedule& sched, Eigen::MatrixXd init, long long steps,
                                    std::span<const long long> checkpoints,
                                    const NoiseStream& noise,
                                    const std::vector<Observer>& observers) {
  if (steps < 0) throw std::invalid_argument("simulate: steps must be >= 0");
  for (size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 0 || checkpoints[i] > steps)
      throw std::invalid_argument("simulate: checkpoint outside [0, steps]");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      throw std::invalid_argument("simulate: checkpoints must be sorted and unique");
  }

  EnsembleState state{std::move(init), 0, 0.0};
  check_shapes(state, sys, ens);
  if (!state.X.allFinite()) throw DivergenceError(0, "simulate: non-finite initial state");

  std::vector<EnsembleState> snapshots;
  size_t next_cp = 0;
  auto visit = [&](const EnsembleState& s) {
    for (const auto& obs : observers) obs(s);
    if (next_cp < checkpoints.size() && checkpoints[next_cp] == s.k) {
      snapshots.push_back(s);
      ++next_cp;
    }
  };
  visit(state);
  for (long long k = 0; k < steps; ++k) {
    state = em_step(state, sys, ens, sched, noise);
    visit(state);
  }
  return snapshots;
}

double time_change_forward(double t) {
  if (t < 0.0) throw std::invalid_argument("time_change_forward: t must be >= 0");
  return std::log1p(t);
}

double time_change_inverse(double s) {
  if (s < 0.0) throw std::invalid_argument("time_change_inverse: s must be >= 0");
  return std::expm1(s);
}

std::vector<FineSdeRecord> sde_fine_approx(const MixingSystem& sys, const PotentialEnsemble& ens,
                                           double sigma, double horizon, double dt,
                                           Eigen::MatrixXd init, const NoiseStream& noise,
                                           int record_every) {
  if (!(dt > 0.0 && dt <= 1e-2))
    throw std::invalid_argument("sde_fine_approx: dt must lie in (0, 1e-2]");
  if (!(dt * (1.0 + ens.L_lip) < 1.0))
    throw std::invalid_argument("sde_fine_approx: dt (1 + L) must stay below 1");
  if (horizon < 0.0) throw std::invalid_argument("sde_fine_approx: horizon must be >= 0");
  if (record_every < 1) throw std::invalid_argument("sde_fine_approx: record_every must be >= 1");

  const long long steps = static_cast<long long>(std::ceil(horizon / dt - 1e-12));
  Eigen::MatrixXd X = std::move(init);
  if (X.rows() != sys.size() || X.cols() != ens.dimension())
    throw std::invalid_argument("sde_fine_approx: initial state shape mismatch");

  std::vector<FineSdeRecord> records;
  auto record = [&](long long step, const Eigen::MatrixXd& state) {
    FineSdeRecord r;
    r.t = static_cast<double>(step) * dt;
    const Eigen::RowVectorXd xbar = state.colwise().mean();
    r.consensus_energy = (state.rowwise() - xbar).squaredNorm();
    r.xbar = xbar.transpose();
    records.push_back(std::move(r));
  };

  record(0, X);
  for (long long j = 0; j < steps; ++j) {
    const double t = static_cast<double>(j) * dt;
    const double alpha = 1.0 / (1.0 + t);
    X = X - dt * laplacian_apply(sys, X) - (alpha * dt) * grad_stacked(ens, X);
    if (sigma > 0.0) {
      X += std::sqrt(2.0 * sigma * alpha * dt) *
           noise.gaussian_matrix(static_cast<std::uint64_t>(j + 1), X.rows(), X.cols());
    }
    if (!X.allFinite())
      throw DivergenceError(j + 1, "sde_fine_approx: non-finite state at step " +
                                       std::to_string(j + 1));
    if ((j + 1) % record_every == 0 || j + 1 == steps) record(j + 1, X);
  }
  return records;
}

}  // namespace dlmc
