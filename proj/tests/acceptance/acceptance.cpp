// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   acceptance [--config-dir DIR] [--out DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "peerlab/agents.hpp"
#include "peerlab/config.hpp"
#include "peerlab/experiment.hpp"
#include "peerlab/metrics.hpp"
#include "peerlab/peer_core.hpp"
#include "peerlab/platform.hpp"
#include "peerlab/tensor_nn.hpp"

#ifndef PEERLAB_CONFIG_DIR
#define PEERLAB_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using namespace peerlab;

namespace {

// Tolerances and thresholds.
constexpr double kGridRuntimeLimitSec = 600.0;
constexpr double kPendulumSeedLimitSec = 1200.0;
constexpr double kDrdFractionRequired = 0.90;
constexpr double kBaselineMargin = 300.0;
constexpr int kBaselineEpisodes = 100;
constexpr double kStepsFactor = 2.0;
constexpr double kGradRelTol = 1e-4;
constexpr double kTargetGradTol = 1e-9;
constexpr double kOracleTol = 1e-10;
constexpr double kSoftUpdateTol = 1e-12;
constexpr int kGradTrials = 100;
constexpr int kOracleTrials = 1000;

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mean(const std::vector<double>& v) {
  return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> final_quarter(const std::vector<double>& v) {
  const std::size_t start = v.size() - (v.size() + 3) / 4;
  return {v.begin() + static_cast<long>(start), v.end()};
}

std::vector<double> last_n(const std::vector<double>& v, std::size_t n) {
  const std::size_t k = std::min(n, v.size());
  return {v.end() - static_cast<long>(k), v.end()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string body_without_header(const fs::path& p) {
  const std::string s = slurp(p);
  return s.substr(s.find('\n') + 1);
}

// ------------------------------------------------------------ grid world

struct GridArm {
  std::vector<double> cosine;  // per seed, final-quarter mean
  std::vector<double> q_gap;
  std::vector<double> steps;   // per seed, last-100-episode mean
  bool failed = false;
};

GridArm run_grid_arm(const fs::path& config_path, const fs::path& out) {
  harness::ExperimentConfig cfg = harness::parse_config(config_path, {"output_dir=" + out.string()});
  const auto summary = harness::run_experiment(cfg);
  GridArm arm;
  for (const auto& s : summary.seeds) {
    const auto table = harness::read_metrics_csv(s.csv_path);
    arm.failed |= table.failed;
    arm.cosine.push_back(mean(final_quarter(table.values("cosine_similarity"))));
    arm.q_gap.push_back(mean(final_quarter(table.values("q_gap"))));
    arm.steps.push_back(mean(last_n(table.values("steps_to_goal"), 100)));
  }
  return arm;
}

void grid_criteria(const fs::path& config_dir, const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const GridArm peer = run_grid_arm(config_dir / "gridworld_peer.conf", out / "gridworld_peer");
  const GridArm dqn = run_grid_arm(config_dir / "gridworld_dqn.conf", out / "gridworld_dqn");
  const double elapsed = seconds_since(t0);
  const bool ok_runs = !peer.failed && !dqn.failed;

  const double cos_p = mean(peer.cosine);
  const double cos_d = mean(dqn.cosine);
  report(ok_runs && cos_p < cos_d && elapsed <= kGridRuntimeLimitSec, "fig3b_cosine_similarity",
         "peer=" + fmt(cos_p) + " dqn=" + fmt(cos_d) + " (need peer < dqn), runtime " + fmt(elapsed) + " s (limit " +
             fmt(kGridRuntimeLimitSec) + ")");

  const double gap_p = mean(peer.q_gap);
  const double gap_d = mean(dqn.q_gap);
  report(ok_runs && gap_p > gap_d && gap_p > 0.0, "fig3c_q_gap",
         "peer=" + fmt(gap_p) + " dqn=" + fmt(gap_d) + " (need peer > dqn and peer > 0)");

  const double steps_p = mean(peer.steps);
  const double steps_d = mean(dqn.steps);
  const double limit = kStepsFactor * envs::GridWorld::kShortestPath;
  report(ok_runs && steps_p <= steps_d && steps_p <= limit, "fig3d_steps_to_goal",
         "peer=" + fmt(steps_p) + " dqn=" + fmt(steps_d) + " (need peer <= dqn and peer <= " + fmt(limit) + ")");

  std::cout << "  per-seed cosine peer/dqn:";
  for (std::size_t i = 0; i < peer.cosine.size(); ++i) std::cout << " " << fmt(peer.cosine[i]) << "/" << fmt(dqn.cosine[i]);
  std::cout << "\n  per-seed q_gap peer/dqn:";
  for (std::size_t i = 0; i < peer.q_gap.size(); ++i) std::cout << " " << fmt(peer.q_gap[i]) << "/" << fmt(dqn.q_gap[i]);
  std::cout << "\n  per-seed steps peer/dqn:";
  for (std::size_t i = 0; i < peer.steps.size(); ++i) std::cout << " " << fmt(peer.steps[i]) << "/" << fmt(dqn.steps[i]);
  std::cout << std::endl;
}

// ------------------------------------------------------------ pendulum

double random_policy_baseline(std::uint64_t seed) {
  envs::Pendulum env;
  Rng rng = make_stream(seed, streams::kEval);
  std::uniform_real_distribution<double> torque(-envs::Pendulum::kMaxTorque, envs::Pendulum::kMaxTorque);
  return agents::evaluate_pendulum_policy([&](const nn::Vector&, Rng& r) { return torque(r); }, env,
                                          kBaselineEpisodes, rng);
}

void pendulum_criteria(const fs::path& config_dir, const fs::path& out) {
  harness::ExperimentConfig cfg =
      harness::parse_config(config_dir / "pendulum_peer.conf", {"output_dir=" + (out / "pendulum_peer").string()});
  long drd_total = 0;
  long drd_ok = 0;
  bool all_learn = true;
  bool all_fast = true;
  bool any_failed = false;
  std::ostringstream detail;
  for (std::uint64_t seed : cfg.seeds) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = harness::run_seed(cfg, seed);
    const double elapsed = seconds_since(t0);
    any_failed |= result.failed;
    const auto table = harness::read_metrics_csv(result.csv_path);
    const std::size_t step_col = table.column_index("env_step");
    const std::size_t drd_col = table.column_index("mean_drd");
    for (const auto& row : table.rows) {
      if (!row[drd_col] || *row[step_col] <= static_cast<double>(cfg.agent.warmup_steps)) continue;
      ++drd_total;
      if (*row[drd_col] <= 0.0) ++drd_ok;
    }
    const double score = mean(last_n(table.values("eval_return"), 3));
    const double baseline = random_policy_baseline(seed);
    all_learn &= score - baseline >= kBaselineMargin;
    all_fast &= elapsed <= kPendulumSeedLimitSec;
    detail << " seed " << seed << ": last3=" << fmt(score) << " random=" << fmt(baseline) << " time=" << fmt(elapsed)
           << "s;";
  }
  const double fraction = drd_total ? static_cast<double>(drd_ok) / static_cast<double>(drd_total) : 0.0;
  report(!any_failed && fraction >= kDrdFractionRequired, "fig1_drd_nonpositive",
         fmt(100.0 * fraction) + "% of " + std::to_string(drd_total) + " post-warmup points have mean_drd <= 0 (need >= " +
             fmt(100.0 * kDrdFractionRequired) + "%)");
  report(!any_failed && all_learn && all_fast, "pendulum_learning_smoke",
         "need last3 - random >= " + fmt(kBaselineMargin) + " and <= " + fmt(kPendulumSeedLimitSec) + " s per seed;" +
             detail.str());
}

// ------------------------------------------------------------ gradient suite

struct GradCase {
  nn::MlpParams params;
  nn::Matrix states;
  std::vector<int> actions;
  nn::Vector targets;
  nn::Matrix target_phi;
  double beta;
};

bool near_kink(const nn::ForwardTrace& trace) {
  for (std::size_t k = 0; k + 1 < trace.pre.size(); ++k) {
    if (trace.pre[k].cwiseAbs().minCoeff() < 1e-4) return true;
  }
  return false;
}

void gradient_criterion() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> width(1, 8);
  std::uniform_int_distribution<int> depth(1, 3);
  std::uniform_int_distribution<int> batch(1, 4);
  std::uniform_real_distribution<double> beta_dist(0.0, 1.0);
  double worst = 0.0;
  int trials = 0;
  while (trials < kGradTrials) {
    std::vector<int> sizes{width(rng)};
    const int hidden = depth(rng);
    for (int k = 0; k < hidden; ++k) sizes.push_back(width(rng));
    sizes.push_back(width(rng));
    GradCase c;
    c.params = nn::init_mlp(sizes, rng(), false);
    const int b = batch(rng);
    c.states = oracle::random_matrix(sizes.front(), b, rng, -2.0, 2.0);
    std::uniform_int_distribution<int> act(0, sizes.back() - 1);
    for (int i = 0; i < b; ++i) c.actions.push_back(act(rng));
    c.targets = oracle::random_matrix(b, 1, rng, -3.0, 3.0);
    c.target_phi = oracle::random_matrix(c.params.representation_width(), b, rng, 0.0, 2.0);
    c.beta = beta_dist(rng);

    const auto trace = nn::forward_batch(c.params, c.states);
    if (near_kink(trace)) continue;
    ++trials;

    nn::Vector q(b);
    for (int i = 0; i < b; ++i) q[i] = trace.output()(c.actions[static_cast<std::size_t>(i)], i);
    const nn::Vector dq = peer::pe_loss_grad(q, c.targets);
    nn::Matrix out_grad = nn::Matrix::Zero(sizes.back(), b);
    for (int i = 0; i < b; ++i) out_grad(c.actions[static_cast<std::size_t>(i)], i) = dq[i];
    const auto analytic = nn::flatten(
        nn::backward(c.params, trace, out_grad, c.beta * peer::peer_loss_grad(trace.representation(), c.target_phi)));

    const auto target_rows = oracle::to_rows(c.target_phi);
    const auto state_rows = oracle::to_rows(c.states);
    const std::vector<double> y(c.targets.data(), c.targets.data() + b);
    auto objective = [&](const std::vector<double>& flat) {
      nn::MlpParams p = c.params;
      nn::unflatten(flat, p);
      std::vector<double> qs;
      oracle::Rows phis;
      for (int i = 0; i < b; ++i) {
        auto [phi, out] = oracle::forward(p, state_rows[static_cast<std::size_t>(i)]);
        qs.push_back(out[static_cast<std::size_t>(c.actions[static_cast<std::size_t>(i)])]);
        phis.push_back(std::move(phi));
      }
      return oracle::pe_loss(qs, y) + c.beta * oracle::peer_loss(phis, target_rows);
    };
    const auto numeric = oracle::central_difference(objective, nn::flatten(c.params), 1e-5);
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      worst = std::max(worst, oracle::relative_error(analytic[i], numeric[i]));
    }
  }

  // Target networks: the only change a training step makes to them is the
  // soft update, so their effective gradient is zero.
  double target_residual = 0.0;
  for (int t = 0; t < kGradTrials; ++t) {
    agents::AgentConfig cfg = agents::AgentConfig::gridworld();
    cfg.hidden_widths = {width(rng), width(rng)};
    cfg.beta = beta_dist(rng);
    agents::DqnAgent dqn(20, 4, cfg, rng());
    std::vector<replay::Transition> grid;
    std::uniform_int_distribution<int> cell(0, 18);
    std::uniform_int_distribution<int> act(0, 3);
    for (int i = 0; i < 8; ++i) {
      envs::GridWorld env;
      env.reset();
      env.set_state(cell(rng));
      const int a = act(rng);
      replay::Transition tr;
      tr.state = envs::GridWorld::one_hot(env.state());
      const auto s = env.step(a);
      tr.action = nn::Vector{{static_cast<double>(a)}};
      tr.reward = s.reward;
      tr.next_state = s.observation;
      tr.done = s.terminal;
      grid.push_back(tr);
    }
    nn::MlpParams expected = dqn.target();
    dqn.train_step(grid);
    agents::soft_update(dqn.online(), expected, cfg.eta);
    const auto got = nn::flatten(dqn.target());
    const auto want = nn::flatten(expected);
    for (std::size_t i = 0; i < got.size(); ++i) target_residual = std::max(target_residual, std::abs(got[i] - want[i]));

    agents::AgentConfig tcfg = agents::AgentConfig::continuous();
    tcfg.hidden_widths = {width(rng), width(rng)};
    tcfg.beta = cfg.beta;
    agents::Td3Agent td3(3, 1, {-2.0, 2.0}, tcfg, rng());
    std::vector<replay::Transition> pend;
    envs::Pendulum env;
    Rng env_rng(rng());
    std::uniform_real_distribution<double> torque(-2.0, 2.0);
    for (int i = 0; i < 8; ++i) {
      replay::Transition tr;
      tr.state = env.reset(env_rng);
      tr.action = nn::Vector{{torque(rng)}};
      const auto s = env.step(tr.action[0]);
      tr.reward = s.reward;
      tr.next_state = s.observation;
      pend.push_back(tr);
    }
    Rng noise(rng());
    for (int step = 0; step < 2; ++step) {
      std::array<nn::MlpParams, 3> before{td3.actor_target(), td3.critic_target(0), td3.critic_target(1)};
      const auto stats = td3.train_step(pend, noise);
      if (stats.actor_updated) {
        agents::soft_update(td3.actor(), before[0], tcfg.eta);
        agents::soft_update(td3.critic(0), before[1], tcfg.eta);
        agents::soft_update(td3.critic(1), before[2], tcfg.eta);
      }
      const std::array<const nn::MlpParams*, 3> now{&td3.actor_target(), &td3.critic_target(0), &td3.critic_target(1)};
      for (int k = 0; k < 3; ++k) {
        const auto g = nn::flatten(*now[static_cast<std::size_t>(k)]);
        const auto w = nn::flatten(before[static_cast<std::size_t>(k)]);
        for (std::size_t i = 0; i < g.size(); ++i) target_residual = std::max(target_residual, std::abs(g[i] - w[i]));
      }
    }
  }

  report(worst < kGradRelTol && target_residual <= kTargetGradTol, "gradient_suite",
         std::to_string(trials) + " networks, max relative error " + fmt(worst) + " (need < " + fmt(kGradRelTol) +
             "); target-network residual " + fmt(target_residual) + " (need <= " + fmt(kTargetGradTol) + ")");
}

// ------------------------------------------------------------ oracle suite

double rel_gap(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

void oracle_criterion() {
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int> width(1, 16);
  std::uniform_int_distribution<int> batch(1, 32);
  std::uniform_real_distribution<double> gamma(0.05, 1.0);
  std::uniform_real_distribution<double> norm(0.05, 50.0);
  std::uniform_real_distribution<double> reward(-20.0, 20.0);
  double drd = 0.0, peer = 0.0, pe = 0.0, bound = 0.0, lln = 0.0;
  for (int t = 0; t < kOracleTrials; ++t) {
    const int w = width(rng);
    const int b = batch(rng);
    const nn::Matrix phi = oracle::random_matrix(w, b, rng, -5.0, 5.0);
    const nn::Matrix tgt = oracle::random_matrix(w, b, rng, -5.0, 5.0);
    const nn::Vector r = oracle::random_matrix(b, 1, rng, -20.0, 20.0);
    const double g = gamma(rng);
    const double n = norm(rng);
    const auto phi_rows = oracle::to_rows(phi);
    const auto tgt_rows = oracle::to_rows(tgt);
    const std::vector<double> rv(r.data(), r.data() + b);

    const auto rep = metrics::drd_batch(phi, tgt, r, g, n);
    const auto ref = oracle::drd(phi_rows, tgt_rows, rv, g, n);
    drd = std::max({drd, rel_gap(rep.mean_drd, ref.drd), rel_gap(rep.mean_similarity, ref.similarity),
                    rel_gap(rep.mean_bound, ref.bound)});

    peer = std::max(peer, rel_gap(peer::peer_loss(phi, tgt), oracle::peer_loss(phi_rows, tgt_rows)));

    const nn::Vector q = tgt.row(0).transpose();
    const nn::Vector y = phi.row(0).transpose();
    pe = std::max(pe, rel_gap(peer::pe_loss(q, y), oracle::pe_loss(std::vector<double>(q.data(), q.data() + b),
                                                                   std::vector<double>(y.data(), y.data() + b))));

    const double rr = reward(rng);
    bound = std::max(bound, rel_gap(metrics::theorem1_bound(rr, g, n), oracle::theorem1_bound(rr, g, n)));

    std::vector<int> sizes{width(rng), width(rng), width(rng)};
    const auto params = nn::init_mlp(sizes, rng(), t % 2 == 0);
    lln = std::max(lln, rel_gap(nn::last_layer_norm(params), oracle::last_layer_norm(params)));
  }
  const double worst = std::max({drd, peer, pe, bound, lln});
  report(worst <= kOracleTol, "oracle_suite",
         std::to_string(kOracleTrials) + " inputs each; max deviation drd_batch=" + fmt(drd) + " peer_loss=" + fmt(peer) +
             " pe_loss=" + fmt(pe) + " theorem1_bound=" + fmt(bound) + " last_layer_norm=" + fmt(lln) + " (need <= " +
             fmt(kOracleTol) + ")");
}

// ------------------------------------------------------------ closed-form suite

harness::ExperimentConfig short_grid(const fs::path& out) {
  auto c = harness::ExperimentConfig::defaults_for(harness::EnvKind::kGridWorld);
  c.seeds = {3};
  c.total_episodes = 200;
  c.output_dir = out;
  return c;
}

harness::ExperimentConfig short_pendulum(const fs::path& out) {
  auto c = harness::ExperimentConfig::defaults_for(harness::EnvKind::kPendulum);
  c.seeds = {3};
  c.total_steps = 2000;
  c.eval_interval = 1000;
  c.eval_episodes = 2;
  c.agent.warmup_steps = 500;
  c.agent.hidden_widths = {64, 64};
  c.output_dir = out;
  return c;
}

void closed_form_criterion(const fs::path& config_dir, const fs::path& out) {
  // soft update n-step formula
  std::mt19937_64 rng(4242);
  double soft = 0.0;
  const std::vector<int> sizes{6, 8, 8, 4};
  for (double eta : {0.005, 0.05, 0.3, 0.7, 1.0}) {
    const auto online = nn::init_mlp(sizes, rng(), true);
    auto target = nn::init_mlp(sizes, rng(), true);
    const auto on = nn::flatten(online);
    const auto t0 = nn::flatten(target);
    for (int n = 1; n <= 100; ++n) {
      agents::soft_update(online, target, eta);
      const double keep = std::pow(1.0 - eta, n);
      const auto got = nn::flatten(target);
      for (std::size_t i = 0; i < got.size(); ++i) soft = std::max(soft, std::abs(got[i] - (keep * t0[i] + (1.0 - keep) * on[i])));
    }
  }

  // beta = 0 ablation: peer on with beta 0 versus peer off, whole runs.
  bool ablation = true;
  for (auto make : {short_grid, short_pendulum}) {
    auto on = make(out / "ablation_on");
    on.agent.peer_enabled = true;
    on.agent.beta = 0.0;
    auto off = make(out / "ablation_off");
    off.agent.peer_enabled = false;
    const auto a = harness::run_seed(on, 3);
    const auto b = harness::run_seed(off, 3);
    ablation &= !a.failed && !b.failed && body_without_header(a.csv_path) == body_without_header(b.csv_path);
  }

  // same-seed reruns
  bool rerun = true;
  for (auto make : {short_grid, short_pendulum}) {
    const auto a = harness::run_seed(make(out / "rerun_a"), 3);
    const auto b = harness::run_seed(make(out / "rerun_b"), 3);
    rerun &= !a.failed && slurp(a.csv_path) == slurp(b.csv_path);
  }
  const fs::path full = out / "gridworld_peer" / "seed_0.csv";
  if (fs::exists(full)) {
    auto cfg = harness::parse_config(config_dir / "gridworld_peer.conf", {"output_dir=" + (out / "rerun_full").string()});
    const auto again = harness::run_seed(cfg, 0);
    rerun &= slurp(again.csv_path) == slurp(full);
  }

  report(soft <= kSoftUpdateTol && ablation && rerun, "closed_form_suite",
         "soft_update max error " + fmt(soft) + " (need <= " + fmt(kSoftUpdateTol) + "); beta=0 ablation " +
             (ablation ? "bit-identical" : "DIFFERS") + "; same-seed reruns " + (rerun ? "byte-identical" : "DIFFER"));
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  fs::path config_dir = PEERLAB_CONFIG_DIR;
  fs::path out = "acceptance_runs";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--config-dir") config_dir = argv[i + 1];
    else if (flag == "--out") out = argv[i + 1];
  }
  fs::remove_all(out);
  fs::create_directories(out);

  gradient_criterion();
  oracle_criterion();
  grid_criteria(config_dir, out);
  closed_form_criterion(config_dir, out);
  pendulum_criteria(config_dir, out);

  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
