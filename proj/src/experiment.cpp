#include "dlmc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dlmc/errors.hpp"
#include "dlmc/svg.hpp"

namespace dlmc {

namespace {

constexpr std::uint64_t kInitSalt = 0x696e697453616c74ULL;
constexpr std::uint64_t kTargetSalt = 0x7461726765742121ULL;

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

// Deterministic replica fan-out: each index writes only its own slot, the
// merge order is by index, so thread scheduling cannot change any output.
void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  std::atomic<int> cursor{0};
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (int i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open output file " + file.string());
  out.precision(17);
  return out;
}

void write_json(const std::filesystem::path& file, const nlohmann::json& j) {
  auto out = open_out(file);
  out << j.dump(2) << '\n';
}

std::filesystem::path prepare_outdir(const ExperimentConfig& cfg) {
  std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  write_json(dir / "config.json", config_to_json(cfg));
  return dir;
}

std::vector<double> fit_window(const std::vector<long long>& ks, const std::vector<double>& vs,
                               std::vector<long long>& ks_out) {
  // Fits run on log axes, so k = 0 can never participate.
  std::vector<double> vs_out;
  for (size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1) continue;
    ks_out.push_back(ks[i]);
    vs_out.push_back(vs[i]);
  }
  return vs_out;
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("topology")) {
    const auto& t = j.at("topology");
    c.topology.kind = t.value("kind", c.topology.kind);
    c.topology.m = t.value("m", c.topology.m);
    c.topology.edge_prob = t.value("edge_prob", c.topology.edge_prob);
    c.topology.seed = t.value("seed", c.topology.seed);
    c.topology.rows = t.value("rows", c.topology.rows);
    c.topology.retries = t.value("retries", c.topology.retries);
    c.topology.lazy_theta = t.value("lazy_theta", c.topology.lazy_theta);
    c.topology.path = t.value("path", c.topology.path);
  }
  if (j.contains("potential")) {
    const auto& p = j.at("potential");
    c.potential.kind = p.value("kind", c.potential.kind);
    if (p.contains("inline")) c.potential.inline_spec = p.at("inline");
    c.potential.file = p.value("file", c.potential.file);
    c.potential.csv = p.value("csv", c.potential.csv);
    c.potential.ridge = p.value("ridge", c.potential.ridge);
    c.potential.dimension = p.value("dimension", c.potential.dimension);
  }
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    c.h_policy = s.value("h_policy", c.h_policy);
    c.h = s.value("h", c.h);
    c.h_gate = s.value("gate", c.h_gate);
    c.alpha_policy = s.value("alpha_policy", c.alpha_policy);
    c.sigma = s.value("sigma", c.sigma);
  }
  c.steps = j.value("steps", c.steps);
  c.replicas = j.value("replicas", c.replicas);
  c.seed = j.value("seed", c.seed);
  c.checkpoints_per_decade = j.value("checkpoints_per_decade", c.checkpoints_per_decade);
  c.burn_in = j.value("burn_in", c.burn_in);
  if (j.contains("init")) {
    const auto& i = j.at("init");
    c.init.kind = i.value("kind", c.init.kind);
    c.init.mean = i.value("mean", c.init.mean);
    c.init.spread = i.value("spread", c.init.spread);
    c.init.rows = i.value("rows", c.init.rows);
  }
  c.out = j.value("out", c.out);
  if (j.contains("fine_sde")) {
    const auto& f = j.at("fine_sde");
    c.fine_sde.enabled = f.value("enabled", c.fine_sde.enabled);
    c.fine_sde.dt = f.value("dt", c.fine_sde.dt);
    c.fine_sde.horizon = f.value("horizon", c.fine_sde.horizon);
    c.fine_sde.epsilon = f.value("epsilon", c.fine_sde.epsilon);
    c.fine_sde.record_every = f.value("record_every", c.fine_sde.record_every);
  }
  c.empirical_every = j.value("empirical_every", c.empirical_every);
  c.empirical_max_points = j.value("empirical_max_points", c.empirical_max_points);
  c.convergence_mode = j.value("convergence_mode", c.convergence_mode);
  c.bounds_eps = j.value("bounds_eps", c.bounds_eps);
  if (j.contains("f0") && !j.at("f0").is_null()) c.f0_override = j.at("f0").get<double>();
  c.write_trajectories = j.value("write_trajectories", c.write_trajectories);
  c.threads = j.value("threads", c.threads);
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["topology"] = {{"kind", c.topology.kind},       {"m", c.topology.m},
                   {"edge_prob", c.topology.edge_prob}, {"seed", c.topology.seed},
                   {"rows", c.topology.rows},           {"retries", c.topology.retries},
                   {"lazy_theta", c.topology.lazy_theta}, {"path", c.topology.path}};
  j["potential"] = {{"kind", c.potential.kind}, {"file", c.potential.file},
                    {"csv", c.potential.csv},   {"ridge", c.potential.ridge},
                    {"dimension", c.potential.dimension}};
  if (!c.potential.inline_spec.is_null()) j["potential"]["inline"] = c.potential.inline_spec;
  j["schedule"] = {{"h_policy", c.h_policy},
                   {"h", c.h},
                   {"gate", c.h_gate},
                   {"alpha_policy", c.alpha_policy},
                   {"sigma", c.sigma}};
  j["steps"] = c.steps;
  j["replicas"] = c.replicas;
  j["seed"] = c.seed;
  j["checkpoints_per_decade"] = c.checkpoints_per_decade;
  j["burn_in"] = c.burn_in;
  j["init"] = {{"kind", c.init.kind}, {"mean", c.init.mean}, {"spread", c.init.spread},
               {"rows", c.init.rows}};
  j["out"] = c.out;
  j["fine_sde"] = {{"enabled", c.fine_sde.enabled},
                   {"dt", c.fine_sde.dt},
                   {"horizon", c.fine_sde.horizon},
                   {"epsilon", c.fine_sde.epsilon},
                   {"record_every", c.fine_sde.record_every}};
  j["empirical_every"] = c.empirical_every;
  j["empirical_max_points"] = c.empirical_max_points;
  j["convergence_mode"] = c.convergence_mode;
  j["bounds_eps"] = c.bounds_eps;
  j["f0"] = c.f0_override ? nlohmann::json(*c.f0_override) : nlohmann::json(nullptr);
  j["write_trajectories"] = c.write_trajectories;
  j["threads"] = c.threads;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open config " + file.string());
  nlohmann::json j;
  in >> j;
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// instance construction

namespace {

MixingSystem build_mixing(const TopologySpec& spec) {
  if (spec.kind == "single") return single_agent_system();
  if (spec.kind == "file") {
    std::ifstream in(spec.path);
    if (!in) throw std::invalid_argument("cannot open mixing file " + spec.path);
    nlohmann::json j;
    in >> j;
    return j.get<MixingSystem>();
  }
  TopologyParams params;
  params.edge_prob = spec.edge_prob;
  params.seed = spec.seed;
  params.retries = spec.retries;
  params.rows = spec.rows;
  Graph g = build_topology(topology_from_string(spec.kind), spec.m, params);
  MixingSystem sys = metropolis_weights(g);
  if (spec.lazy_theta < 1.0) sys = lazy_mix(sys, spec.lazy_theta);
  return sys;
}

PotentialEnsemble build_potential(const PotentialSpec& spec, int agents) {
  if (spec.kind == "zero") return zero_ensemble(agents, spec.dimension);
  if (spec.kind == "quadratic") {
    nlohmann::json quad = spec.inline_spec;
    if (quad.is_null()) {
      if (spec.file.empty())
        throw std::invalid_argument("quadratic potential needs an inline spec or a file");
      std::ifstream in(spec.file);
      if (!in) throw std::invalid_argument("cannot open potential file " + spec.file);
      in >> quad;
    }
    PotentialEnsemble ens = quadratic_from_json(quad);
    if (ens.agents() != agents)
      throw std::invalid_argument("quadratic potential has " + std::to_string(ens.agents()) +
                                  " components for " + std::to_string(agents) + " agents");
    return ens;
  }
  if (spec.kind == "logistic") {
    if (spec.csv.empty()) throw std::invalid_argument("logistic potential needs a csv path");
    return logistic_ensemble(shards_from_csv(spec.csv, agents), spec.ridge);
  }
  throw std::invalid_argument("unknown potential kind: " + spec.kind);
}

Schedule build_schedule(const ExperimentConfig& cfg, const PotentialEnsemble& ens) {
  const auto alpha = cfg.alpha_policy == "constant" ? Schedule::AlphaPolicy::One
                                                    : Schedule::AlphaPolicy::Paper;
  if (cfg.alpha_policy != "constant" && cfg.alpha_policy != "paper")
    throw std::invalid_argument("unknown alpha policy: " + cfg.alpha_policy);
  if (cfg.h_policy == "constant") return constant_schedule(cfg.h, cfg.sigma, alpha);
  if (cfg.h_policy == "inverse_k") {
    long long gate = cfg.h_gate;
    if (gate == 0) {
      gate = static_cast<long long>(std::ceil((ens.L_lip + ens.m_strong) / 2.0)) - 1;
      gate = std::max<long long>(gate, 2);
    }
    return inverse_k_schedule(gate, cfg.sigma, alpha);
  }
  throw std::invalid_argument("unknown h policy: " + cfg.h_policy);
}

}  // namespace

Instance build_instance(const ExperimentConfig& cfg) {
  Instance inst;
  inst.sys = build_mixing(cfg.topology);
  inst.ens = build_potential(cfg.potential, inst.sys.size());
  inst.sched = build_schedule(cfg, inst.ens);

  if (cfg.f0_override) {
    inst.f0 = *cfg.f0_override;
  } else if (cfg.init.kind == "rows") {
    Eigen::MatrixXd X = initial_state(inst, cfg, 0);
    inst.f0 = consensus_energy(X);
  } else {
    // Independent N(mu, spread^2) entries with a common center: the
    // deviation block has m-1 free modes per column.
    inst.f0 = cfg.init.spread * cfg.init.spread * inst.ens.dimension() * (inst.sys.size() - 1);
  }
  return inst;
}

Eigen::MatrixXd initial_state(const Instance& inst, const ExperimentConfig& cfg, int replica) {
  const int m = inst.sys.size();
  const int d = inst.ens.dimension();
  if (cfg.init.kind == "rows") {
    if (static_cast<int>(cfg.init.rows.size()) != m)
      throw std::invalid_argument("init rows: need one row per agent");
    Eigen::MatrixXd X(m, d);
    for (int i = 0; i < m; ++i) {
      if (static_cast<int>(cfg.init.rows[i].size()) != d)
        throw std::invalid_argument("init rows: row dimension mismatch");
      for (int j = 0; j < d; ++j) X(i, j) = cfg.init.rows[i][j];
    }
    return X;
  }
  if (cfg.init.kind != "gaussian")
    throw std::invalid_argument("unknown init kind: " + cfg.init.kind);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  if (!cfg.init.mean.empty()) {
    if (static_cast<int>(cfg.init.mean.size()) != d)
      throw std::invalid_argument("init mean: dimension mismatch");
    mean = Eigen::Map<const Eigen::VectorXd>(cfg.init.mean.data(), d);
  }
  const NoiseStream stream =
      NoiseStream(cfg.seed, static_cast<std::uint64_t>(replica)).substream(kInitSalt);
  Eigen::MatrixXd X = cfg.init.spread * stream.gaussian_matrix(0, m, d);
  X.rowwise() += mean.transpose();
  return X;
}

BoundInputs bound_inputs(const Instance& inst, const ExperimentConfig& cfg) {
  BoundInputs in;
  in.sigma = cfg.sigma;
  in.L_lip = inst.ens.L_lip;
  in.m_strong = inst.ens.m_strong;
  in.d = inst.ens.dimension();
  in.h = inst.sched.h_at(0);
  in.f0 = inst.f0;
  in.alpha0 = 1.0;  // alpha(t) = 1/(1+t) at t = 0
  in.beta_bar = inst.sys.size() >= 2 ? inst.sys.beta_bar : nan_value();
  return in;
}

std::vector<long long> build_checkpoints(long long steps, int per_decade) {
  if (steps < 1) throw std::invalid_argument("build_checkpoints: steps must be >= 1");
  if (per_decade < 1) throw std::invalid_argument("build_checkpoints: per_decade must be >= 1");
  std::set<long long> pts{0, steps};
  for (int i = 0;; ++i) {
    const double e = static_cast<double>(i) / per_decade;
    if (e > 18.5) break;
    const long long k = std::llround(std::pow(10.0, e));
    if (k > steps) break;
    pts.insert(k);
  }
  return {pts.begin(), pts.end()};
}

// ---------------------------------------------------------------------------
// spectra

SpectraReport cmd_spectra(const ExperimentConfig& cfg) {
  MixingSystem sys = build_mixing(cfg.topology);
  const SpectralSummary s = spectral_summary(sys);  // rejects the degenerate m = 1 system
  SpectraReport rep;
  rep.assumption_holds = s.beta < 1.0;
  rep.report = sys;
  rep.report["spectral"]["lambda2_L"] = s.lambda2_L;
  rep.report["assumption_beta_lt_1"] = rep.assumption_holds;
  if (!cfg.out.empty()) {
    const auto dir = prepare_outdir(cfg);
    write_json(dir / "spectra.json", rep.report);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// consensus

namespace {

// Per-replica record of checkpoint measurements.
struct ReplicaTrack {
  std::vector<double> ts;
  std::vector<double> energy;
  Eigen::MatrixXd xbars;  // checkpoints x d
};

ReplicaTrack run_replica_checkpoints(const Instance& inst, const ExperimentConfig& cfg,
                                     const std::vector<long long>& checkpoints, int replica) {
  const NoiseStream noise(cfg.seed, static_cast<std::uint64_t>(replica));
  ReplicaTrack track;
  track.ts.reserve(checkpoints.size());
  track.energy.reserve(checkpoints.size());
  track.xbars.resize(checkpoints.size(), inst.ens.dimension());
  size_t next = 0;
  Observer obs = [&](const EnsembleState& s) {
    if (next < checkpoints.size() && checkpoints[next] == s.k) {
      track.ts.push_back(s.t);
      track.energy.push_back(consensus_energy(s.X));
      track.xbars.row(static_cast<Eigen::Index>(next)) = average_state(s).transpose();
      ++next;
    }
  };
  try {
    simulate(inst.sys, inst.ens, inst.sched, initial_state(inst, cfg, replica), cfg.steps, {},
             noise, {obs});
  } catch (const DivergenceError& e) {
    throw DivergenceError(e.iteration(), std::string(e.what()) + " (replica " +
                                             std::to_string(replica) + ")");
  }
  return track;
}

void write_trajectories_csv(const std::filesystem::path& file,
                            const std::vector<long long>& checkpoints,
                            const std::vector<ReplicaTrack>& tracks) {
  auto out = open_out(file);
  const Eigen::Index d = tracks.empty() ? 0 : tracks.front().xbars.cols();
  out << "replica,k,t,consensus_energy";
  for (Eigen::Index j = 0; j < d; ++j) out << ",xbar_" << (j + 1);
  out << '\n';
  for (size_t r = 0; r < tracks.size(); ++r) {
    const auto& tr = tracks[r];
    for (size_t i = 0; i < checkpoints.size(); ++i) {
      out << r << ',' << checkpoints[i] << ',' << tr.ts[i] << ',' << tr.energy[i];
      for (Eigen::Index j = 0; j < d; ++j) out << ',' << tr.xbars(static_cast<Eigen::Index>(i), j);
      out << '\n';
    }
  }
}

ConsensusResult consensus_fine_sde(const ExperimentConfig& cfg, const Instance& inst) {
  ConsensusResult res;
  const BoundInputs in = bound_inputs(inst, cfg);
  double bound = nan_value();
  try {
    bound = consensus_time_bound(in, cfg.fine_sde.epsilon);
    res.time_bound = bound;
  } catch (const VacuousBoundError&) {
    res.exit_hint = 4;
  }
  double horizon = cfg.fine_sde.horizon;
  if (horizon <= 0.0) {
    if (!res.time_bound)
      throw std::invalid_argument(
          "fine-sde: no horizon given and the time bound is vacuous (sigma >= beta_bar)");
    horizon = 1.05 * bound;
  }

  std::vector<std::vector<FineSdeRecord>> runs(cfg.replicas);
  parallel_for(cfg.replicas, cfg.threads, [&](int r) {
    const NoiseStream noise(cfg.seed, static_cast<std::uint64_t>(r));
    runs[r] = sde_fine_approx(inst.sys, inst.ens, cfg.sigma, horizon, cfg.fine_sde.dt,
                              initial_state(inst, cfg, r), noise, cfg.fine_sde.record_every);
  });

  const size_t npts = runs.front().size();
  res.fine_times.resize(npts);
  res.fine_mean_energy.assign(npts, 0.0);
  for (size_t i = 0; i < npts; ++i) res.fine_times[i] = runs.front()[i].t;
  for (int r = 0; r < cfg.replicas; ++r)
    for (size_t i = 0; i < npts; ++i) res.fine_mean_energy[i] += runs[r][i].consensus_energy;
  for (size_t i = 0; i < npts; ++i) res.fine_mean_energy[i] /= cfg.replicas;

  for (size_t i = 0; i < npts; ++i) {
    if (res.fine_mean_energy[i] <= cfg.fine_sde.epsilon) {
      res.first_passage_time = res.fine_times[i];
      break;
    }
  }
  if (res.time_bound)
    res.within_bound = res.first_passage_time && *res.first_passage_time <= *res.time_bound;

  res.summary = {{"mode", "fine_sde"},
                 {"epsilon", cfg.fine_sde.epsilon},
                 {"dt", cfg.fine_sde.dt},
                 {"horizon", horizon},
                 {"replicas", cfg.replicas},
                 {"first_passage_time",
                  res.first_passage_time ? nlohmann::json(*res.first_passage_time)
                                         : nlohmann::json(nullptr)},
                 {"consensus_time_bound",
                  res.time_bound ? nlohmann::json(*res.time_bound) : nlohmann::json(nullptr)},
                 {"within_bound", res.within_bound ? nlohmann::json(*res.within_bound)
                                                   : nlohmann::json(nullptr)},
                 {"bound_inputs", in}};

  if (!cfg.out.empty()) {
    const auto dir = prepare_outdir(cfg);
    auto csv = open_out(dir / "series.csv");
    csv << "t,mean_consensus_energy\n";
    for (size_t i = 0; i < npts; ++i)
      csv << res.fine_times[i] << ',' << res.fine_mean_energy[i] << '\n';
    write_json(dir / "fit.json", res.summary);
    PlotSeries meas{"mean consensus energy", res.fine_times, res.fine_mean_energy, "#1f77b4",
                    false};
    PlotSeries eps{"epsilon",
                   {res.fine_times.front() > 0 ? res.fine_times.front() : cfg.fine_sde.dt,
                    res.fine_times.back()},
                   {cfg.fine_sde.epsilon, cfg.fine_sde.epsilon},
                   "#d62728",
                   true};
    write_loglog_svg(dir / "plot.svg", "continuous-time consensus decay", "t",
                     "E consensus energy", {meas, eps});
  }
  return res;
}

}  // namespace

ConsensusResult cmd_consensus(const ExperimentConfig& cfg) {
  Instance inst = build_instance(cfg);
  if (cfg.fine_sde.enabled) return consensus_fine_sde(cfg, inst);
  if (cfg.steps < 1) throw std::invalid_argument("cmd_consensus: steps must be >= 1");
  if (cfg.replicas < 1) throw std::invalid_argument("cmd_consensus: replicas must be >= 1");

  ConsensusResult res;
  res.ks = build_checkpoints(cfg.steps, cfg.checkpoints_per_decade);
  const int m = inst.sys.size();

  std::vector<ReplicaTrack> tracks(cfg.replicas);
  parallel_for(cfg.replicas, cfg.threads,
               [&](int r) { tracks[r] = run_replica_checkpoints(inst, cfg, res.ks, r); });

  const size_t n = res.ks.size();
  res.ts = tracks.front().ts;
  res.mean_energy.assign(n, 0.0);
  for (int r = 0; r < cfg.replicas; ++r)
    for (size_t i = 0; i < n; ++i) res.mean_energy[i] += tracks[r].energy[i];
  for (size_t i = 0; i < n; ++i) res.mean_energy[i] /= cfg.replicas;
  // Pooled deviation cloud against the origin Dirac: the pooled second
  // moment is the replica-mean energy divided by m.
  res.dirac_w2.resize(n);
  for (size_t i = 0; i < n; ++i) res.dirac_w2[i] = std::sqrt(res.mean_energy[i] / m);

  std::vector<long long> fit_ks;
  const std::vector<double> fit_vs = fit_window(res.ks, res.mean_energy, fit_ks);
  try {
    res.energy_fit = fit_rate(fit_ks, fit_vs, cfg.burn_in);
  } catch (const std::invalid_argument&) {
    res.energy_fit.reset();  // zero energies or too few points: no rate to fit
  }

  // Monotone tail of the Dirac distance over the last 10 checkpoints,
  // with 5% slack per step.
  res.dirac_monotone_tail = true;
  const size_t tail = std::min<size_t>(10, n);
  for (size_t i = n - tail; i + 1 < n; ++i) {
    if (res.dirac_w2[i + 1] > 1.05 * res.dirac_w2[i]) {
      res.dirac_monotone_tail = false;
      break;
    }
  }

  res.summary = {{"mode", "discrete"},
                 {"replicas", cfg.replicas},
                 {"steps", cfg.steps},
                 {"energy_fit", res.energy_fit ? nlohmann::json(*res.energy_fit)
                                               : nlohmann::json(nullptr)},
                 {"dirac_monotone_last10", res.dirac_monotone_tail}};

  if (!cfg.out.empty()) {
    const auto dir = prepare_outdir(cfg);
    auto csv = open_out(dir / "series.csv");
    csv << "k,t,mean_consensus_energy,dirac_w2\n";
    for (size_t i = 0; i < n; ++i)
      csv << res.ks[i] << ',' << res.ts[i] << ',' << res.mean_energy[i] << ','
          << res.dirac_w2[i] << '\n';
    if (cfg.write_trajectories) write_trajectories_csv(dir / "trajectories.csv", res.ks, tracks);
    write_json(dir / "fit.json", res.summary);

    std::vector<PlotSeries> series;
    std::vector<double> kd(res.ks.begin(), res.ks.end());
    series.push_back({"E consensus energy", kd, res.mean_energy, "#1f77b4", false});
    series.push_back({"pooled W2 to Dirac", kd, res.dirac_w2, "#2ca02c", false});
    if (res.energy_fit) {
      std::vector<double> fx, fy;
      for (long long k : fit_ks) {
        fx.push_back(static_cast<double>(k));
        fy.push_back(std::exp(res.energy_fit->intercept) *
                     std::pow(static_cast<double>(k), res.energy_fit->slope));
      }
      series.push_back({"energy fit", fx, fy, "#d62728", true});
    }
    write_loglog_svg(dir / "plot.svg", "consensus decay", "k", "value", series);
  }
  return res;
}

// ---------------------------------------------------------------------------
// convergence

namespace {

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

Moments cloud_moments(const Eigen::MatrixXd& cloud) {
  Moments mo;
  mo.mean = cloud.colwise().mean().transpose();
  const Eigen::MatrixXd centered = cloud.rowwise() - mo.mean.transpose();
  const double denom = std::max<double>(1.0, static_cast<double>(cloud.rows()) - 1.0);
  mo.cov = centered.transpose() * centered / denom;
  return mo;
}

}  // namespace

ConvergenceResult cmd_convergence(const ExperimentConfig& cfg) {
  Instance inst = build_instance(cfg);
  if (cfg.steps < 1) throw std::invalid_argument("cmd_convergence: steps must be >= 1");
  if (cfg.replicas < 2) throw std::invalid_argument("cmd_convergence: need at least 2 replicas");

  const bool has_law = inst.ens.stationary_law.has_value();
  bool ground_truth = false;
  if (cfg.convergence_mode == "ground_truth") {
    if (!has_law)
      throw std::invalid_argument(
          "cmd_convergence: ground-truth mode needs a potential with a stationary law");
    ground_truth = true;
  } else if (cfg.convergence_mode == "self") {
    ground_truth = false;
  } else if (cfg.convergence_mode == "auto") {
    ground_truth = has_law;
  } else {
    throw std::invalid_argument("unknown convergence mode: " + cfg.convergence_mode);
  }

  ConvergenceResult res;
  res.ks = build_checkpoints(cfg.steps, cfg.checkpoints_per_decade);
  const size_t n = res.ks.size();
  const int d = inst.ens.dimension();

  std::vector<ReplicaTrack> tracks(cfg.replicas);
  parallel_for(cfg.replicas, cfg.threads,
               [&](int r) { tracks[r] = run_replica_checkpoints(inst, cfg, res.ks, r); });
  res.ts = tracks.front().ts;

  // Replica clouds of the average iterate, one per checkpoint.
  std::vector<Eigen::MatrixXd> clouds(n, Eigen::MatrixXd(cfg.replicas, d));
  for (int r = 0; r < cfg.replicas; ++r)
    for (size_t i = 0; i < n; ++i)
      clouds[i].row(r) = tracks[r].xbars.row(static_cast<Eigen::Index>(i));

  // Target moments.
  if (ground_truth) {
    const GaussianLaw target = inst.ens.stationary_law->scaled(cfg.sigma);
    res.target_mean = target.mean;
    res.target_cov = target.covariance;
  } else {
    // Long-run self mode: the reference is the pooled post-burn-in cloud.
    const size_t cut = static_cast<size_t>(std::floor(cfg.burn_in * static_cast<double>(n)));
    Eigen::MatrixXd pooled((n - cut) * cfg.replicas, d);
    Eigen::Index row = 0;
    for (size_t i = cut; i < n; ++i)
      for (int r = 0; r < cfg.replicas; ++r) pooled.row(row++) = clouds[i].row(r);
    const Moments mo = cloud_moments(pooled);
    res.target_mean = mo.mean;
    res.target_cov = mo.cov;
  }

  res.w2_gauss.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const Moments mo = cloud_moments(clouds[i]);
    res.w2_gauss[i] = w2_gaussian_moments(mo.mean, mo.cov, res.target_mean, res.target_cov);
  }

  // Exact empirical estimate on a downsampled cloud, every few checkpoints.
  res.w2_empirical.assign(n, nan_value());
  const int npts = std::min(cfg.replicas, cfg.empirical_max_points);
  const NoiseStream target_stream = NoiseStream(cfg.seed, 0).substream(kTargetSalt);
  Eigen::LLT<Eigen::MatrixXd> llt(res.target_cov);
  const bool can_sample = llt.info() == Eigen::Success;
  if (npts >= 2 && can_sample) {
    const Eigen::MatrixXd chol = llt.matrixL();
    std::vector<size_t> eval_idx;
    for (size_t i = 0; i < n; ++i)
      if (i % static_cast<size_t>(std::max(1, cfg.empirical_every)) == 0 || i + 1 == n)
        eval_idx.push_back(i);
    std::vector<double> vals(eval_idx.size());
    parallel_for(static_cast<int>(eval_idx.size()), cfg.threads, [&](int which) {
      const size_t i = eval_idx[static_cast<size_t>(which)];
      EmpiricalCloud a{clouds[i].topRows(npts)};
      Eigen::MatrixXd draws = target_stream.gaussian_matrix(static_cast<std::uint64_t>(i), npts, d);
      EmpiricalCloud b{(chol * draws.transpose()).transpose().rowwise() +
                       res.target_mean.transpose()};
      vals[static_cast<size_t>(which)] = w2_empirical_exact(a, b).w2();
    });
    for (size_t j = 0; j < eval_idx.size(); ++j) res.w2_empirical[eval_idx[j]] = vals[j];
  }

  // Theory overlay: the W2 recursion driven from the measured w0.
  const BoundInputs in = bound_inputs(inst, cfg);
  const RecursionCurve curve = w2_recursion_curve(in, res.w2_gauss.front(), cfg.steps, inst.sched);
  res.theory_curve.resize(n);
  for (size_t i = 0; i < n; ++i)
    res.theory_curve[i] = curve.values[static_cast<size_t>(res.ks[i])];

  // Plateau moments over the pooled post-burn-in checkpoints.
  {
    const size_t cut = static_cast<size_t>(std::floor(cfg.burn_in * static_cast<double>(n)));
    Eigen::MatrixXd pooled((n - cut) * cfg.replicas, d);
    Eigen::Index row = 0;
    for (size_t i = cut; i < n; ++i)
      for (int r = 0; r < cfg.replicas; ++r) pooled.row(row++) = clouds[i].row(r);
    const Moments mo = cloud_moments(pooled);
    res.plateau_mean = mo.mean;
    res.plateau_cov = mo.cov;
    res.plateau_w2_vs_target =
        w2_gaussian_moments(mo.mean, mo.cov, res.target_mean, res.target_cov);
  }

  if (cfg.h_policy == "constant") {
    try {
      res.limit_bound = w2_limit_bound(in);
    } catch (const VacuousBoundError&) {
      res.exit_hint = 4;
    }
  } else {
    std::vector<long long> fit_ks;
    const std::vector<double> fit_vs = fit_window(res.ks, res.w2_gauss, fit_ks);
    try {
      res.w2_fit = fit_rate(fit_ks, fit_vs, cfg.burn_in);
    } catch (const std::invalid_argument&) {
      res.w2_fit.reset();
    }
  }

  std::vector<double> pm(res.plateau_mean.data(), res.plateau_mean.data() + d);
  res.summary = {{"mode", ground_truth ? "ground_truth" : "self"},
                 {"replicas", cfg.replicas},
                 {"steps", cfg.steps},
                 {"w2_fit", res.w2_fit ? nlohmann::json(*res.w2_fit) : nlohmann::json(nullptr)},
                 {"plateau_w2_vs_target", res.plateau_w2_vs_target},
                 {"plateau_mean", pm},
                 {"w2_limit_bound", res.limit_bound ? nlohmann::json(*res.limit_bound)
                                                    : nlohmann::json(nullptr)},
                 {"recursion_contracting", curve.contracting},
                 {"bound_inputs", in}};

  if (!cfg.out.empty()) {
    const auto dir = prepare_outdir(cfg);
    auto csv = open_out(dir / "series.csv");
    csv << "k,t,w2_gauss,w2_empirical,w2_recursion_bound\n";
    for (size_t i = 0; i < n; ++i) {
      csv << res.ks[i] << ',' << res.ts[i] << ',' << res.w2_gauss[i] << ',';
      if (std::isfinite(res.w2_empirical[i])) csv << res.w2_empirical[i];
      csv << ',' << res.theory_curve[i] << '\n';
    }
    if (cfg.write_trajectories) write_trajectories_csv(dir / "trajectories.csv", res.ks, tracks);
    write_json(dir / "fit.json", res.summary);

    std::vector<double> kd(res.ks.begin(), res.ks.end());
    std::vector<PlotSeries> series;
    series.push_back({"W2 (gaussian moments)", kd, res.w2_gauss, "#1f77b4", false});
    series.push_back({"W2 (exact assignment)", kd, res.w2_empirical, "#2ca02c", false});
    series.push_back({"W2 recursion bound", kd, res.theory_curve, "#9467bd", true});
    if (res.limit_bound) {
      series.push_back({"W2 limit bound",
                        {1.0, static_cast<double>(cfg.steps)},
                        {*res.limit_bound, *res.limit_bound},
                        "#d62728",
                        true});
    }
    if (res.w2_fit) {
      std::vector<double> fx, fy;
      for (double k : kd) {
        if (k < 1) continue;
        fx.push_back(k);
        fy.push_back(std::exp(res.w2_fit->intercept) * std::pow(k, res.w2_fit->slope));
      }
      series.push_back({"W2 fit", fx, fy, "#ff7f0e", true});
    }
    write_loglog_svg(dir / "plot.svg", "convergence to the stationary law", "k", "W2", series);
  }
  return res;
}

// ---------------------------------------------------------------------------
// bounds

BoundsReport cmd_bounds(const ExperimentConfig& cfg) {
  Instance inst = build_instance(cfg);
  const BoundInputs in = bound_inputs(inst, cfg);
  BoundsReport rep;
  rep.report["inputs"] = in;
  rep.report["epsilon"] = cfg.bounds_eps;
  rep.report["stability"] = stability_report(in, inst.sys, inst.sched);

  auto record = [&](const std::string& name, auto&& eval) {
    try {
      rep.report[name] = eval();
    } catch (const VacuousBoundError& e) {
      rep.report[name] = {{"vacuous", true}, {"reason", e.what()}};
      rep.exit_hint = 4;
    }
  };
  if (inst.sys.size() >= 2) {
    record("consensus_time_bound",
           [&] { return consensus_time_bound(in, cfg.bounds_eps); });
  } else {
    rep.report["consensus_time_bound"] = {{"vacuous", true},
                                          {"reason", "degenerate single-agent network"}};
    rep.exit_hint = 4;
  }
  record("w2_limit_bound", [&] { return w2_limit_bound(in); });

  const RecursionCurve curve = w2_recursion_curve(in, in.f0 > 0.0 ? std::sqrt(in.f0) : 1.0,
                                                  std::max<long long>(cfg.steps, 1), inst.sched);
  const auto cps = build_checkpoints(std::max<long long>(cfg.steps, 1), 10);
  nlohmann::json curve_json = nlohmann::json::array();
  for (long long k : cps)
    curve_json.push_back({{"k", k}, {"bound", curve.values[static_cast<size_t>(k)]}});
  rep.report["w2_recursion_curve"] = {{"contracting", curve.contracting},
                                      {"w0", curve.values.front()},
                                      {"samples", curve_json}};
  rep.report["contraction_rho"] = contraction_rho(in, inst.sched.h_at(0));

  if (!cfg.out.empty()) {
    const auto dir = prepare_outdir(cfg);
    write_json(dir / "bounds.json", rep.report);
  }
  return rep;
}

}  // namespace dlmc
