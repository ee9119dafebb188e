#include "peerlab/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "peerlab/agents.hpp"
#include "peerlab/envs.hpp"
#include "peerlab/errors.hpp"
#include "peerlab/replay.hpp"
#include "peerlab/rng.hpp"

namespace peerlab::harness {
namespace {

using agents::TrainStats;
using nn::Vector;

std::string cell(const std::optional<double>& v) {
  if (!v) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

template <typename Int>
std::string cell(const std::optional<Int>& v) {
  return v ? std::to_string(*v) : std::string{};
}

void fill_train_metrics(MetricRow& row, const TrainStats& s) {
  row.pe_loss = s.pe_loss;
  row.peer_loss = s.peer_loss;
  row.mean_similarity = s.drd.mean_similarity;
  row.mean_bound = s.drd.mean_bound;
  row.mean_drd = s.drd.mean_drd;
  row.cosine_similarity = s.cosine_similarity;
  row.degenerate_rep_count = s.drd.degenerate_rows;
}

std::string header_comment(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "# " << kMetricsSchema << "; env=" << to_string(c.env) << "; algo=" << to_string(c.algo)
      << "; peer_enabled=" << (c.agent.peer_enabled ? "true" : "false") << "; beta=" << cell(std::optional(c.agent.beta))
      << "; drd_source=" << (c.algo == AlgoKind::kTd3 ? "critic1" : "q_network");
  return out.str();
}

std::string header_row() {
  std::string out;
  for (const auto& name : metric_columns()) {
    if (!out.empty()) out += ",";
    out += name;
  }
  return out;
}

class RowWriter {
 public:
  RowWriter(const std::filesystem::path& path, const ExperimentConfig& config) : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot write " + path.string());
    out_ << header_comment(config) << '\n' << header_row() << '\n';
  }
  void write(const MetricRow& row) {
    if (row.has_payload()) out_ << format_row(row) << '\n';
  }
  void fail(const std::string& what) {
    std::string msg = what;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out_ << "# FAILED: " << msg << '\n';
  }
  void close() { out_.close(); }

 private:
  std::ofstream out_;
};

void run_gridworld(const ExperimentConfig& config, std::uint64_t seed, RowWriter& writer, SeedResult& result) {
  using envs::GridWorld;
  Rng init = make_stream(seed, streams::kInit);
  Rng replay_rng = make_stream(seed, streams::kReplay);
  Rng explore = make_stream(seed, streams::kExploration);
  const auto& ac = config.agent;

  agents::DqnAgent agent(GridWorld::kNumStates, GridWorld::kNumActions, ac, init());
  replay::ReplayBuffer buffer(ac.buffer_capacity);
  GridWorld env;
  GridWorld eval_env;
  std::uniform_int_distribution<int> random_action(0, GridWorld::kNumActions - 1);
  const Vector s1 = GridWorld::one_hot(GridWorld::kS1Cell);
  const Vector s2 = GridWorld::one_hot(GridWorld::kS2Cell);

  long env_step = 0;
  for (long episode = 1; episode <= config.total_episodes; ++episode) {
    Vector obs = env.reset();
    bool done = false;
    while (!done) {
      const bool warm = env_step < ac.warmup_steps;
      const int action = warm ? random_action(explore) : agent.act_epsilon_greedy(obs, ac.epsilon, explore);
      const auto step = env.step(action);
      ++env_step;
      buffer.push({obs, Vector::Constant(1, action), step.reward, step.observation, step.terminal});
      obs = step.observation;
      done = step.done;

      MetricRow row;
      row.seed = seed;
      row.env_step = env_step;
      row.episode = episode;
      if (!warm) {
        const auto batch = buffer.sample(static_cast<std::size_t>(ac.batch_size), replay_rng);
        const TrainStats stats = agent.train_step(batch);
        if (agent.train_steps() % static_cast<std::uint64_t>(config.metric_interval) == 0) {
          fill_train_metrics(row, stats);
          row.q_gap = metrics::q_gap(agent.q_values(s1), agent.q_values(s2));
        }
      }
      if (done) {
        row.steps_to_goal = env.step_count();
        if (episode % config.eval_interval == 0) {
          const double ret = agents::evaluate(agent, eval_env, config.eval_episodes);
          row.eval_return = ret;
          result.evaluations.push_back(ret);
        }
      }
      writer.write(row);
    }
  }
}

void run_pendulum(const ExperimentConfig& config, std::uint64_t seed, RowWriter& writer, SeedResult& result) {
  using envs::Pendulum;
  Rng init = make_stream(seed, streams::kInit);
  Rng env_rng = make_stream(seed, streams::kEnv);
  Rng replay_rng = make_stream(seed, streams::kReplay);
  Rng explore = make_stream(seed, streams::kExploration);
  Rng eval_rng = make_stream(seed, streams::kEval);
  const auto& ac = config.agent;
  const agents::ActionBounds bounds{-Pendulum::kMaxTorque, Pendulum::kMaxTorque};

  agents::Td3Agent agent(Pendulum::kObsDim, Pendulum::kActionDim, bounds, ac, init());
  replay::ReplayBuffer buffer(ac.buffer_capacity);
  Pendulum env;
  Pendulum eval_env;
  std::uniform_real_distribution<double> random_torque(bounds.low, bounds.high);

  Vector obs = env.reset(env_rng);
  long episode = 1;
  for (long env_step = 1; env_step <= config.total_steps; ++env_step) {
    const bool warm = env_step - 1 < ac.warmup_steps;
    const Vector action = warm ? Vector::Constant(1, random_torque(explore))
                               : agent.act(obs, ac.exploration_noise_std, explore, /*deterministic=*/false);
    const auto step = env.step(action[0]);
    buffer.push({obs, action, step.reward, step.observation, step.terminal});
    obs = step.observation;

    MetricRow row;
      row.seed = seed;
      row.env_step = env_step;
      row.episode = episode;
    if (!warm) {
      const auto batch = buffer.sample(static_cast<std::size_t>(ac.batch_size), replay_rng);
      const TrainStats stats = agent.train_step(batch, explore);
      if (agent.train_steps() % static_cast<std::uint64_t>(config.metric_interval) == 0) {
        fill_train_metrics(row, stats);
      }
    }
    if (env_step % config.eval_interval == 0) {
      const double ret = agents::evaluate(agent, eval_env, config.eval_episodes, eval_rng);
      row.eval_return = ret;
      result.evaluations.push_back(ret);
    }
    writer.write(row);
    if (step.done) {
      obs = env.reset(env_rng);
      ++episode;
    }
  }
}

double population_std(const std::vector<double>& v, double mean) {
  if (v.empty()) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  out.push_back(std::move(current));
  return out;
}

}  // namespace

bool MetricRow::has_payload() const {
  return eval_return || pe_loss || peer_loss || mean_similarity || mean_bound || mean_drd || cosine_similarity ||
         q_gap || steps_to_goal || degenerate_rep_count;
}

const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> names = {
      "seed",      "env_step",  "episode",   "eval_return",       "pe_loss", "peer_loss",     "mean_similarity",
      "mean_bound", "mean_drd", "cosine_similarity", "q_gap",   "steps_to_goal", "degenerate_rep_count"};
  return names;
}

std::string format_row(const MetricRow& r) {
  std::string out = std::to_string(r.seed) + "," + std::to_string(r.env_step) + "," + std::to_string(r.episode);
  for (const auto* v : {&r.eval_return, &r.pe_loss, &r.peer_loss, &r.mean_similarity, &r.mean_bound, &r.mean_drd,
                        &r.cosine_similarity, &r.q_gap}) {
    out += "," + cell(*v);
  }
  out += "," + cell(r.steps_to_goal);
  out += "," + cell(r.degenerate_rep_count);
  return out;
}

std::size_t MetricTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error("no column named '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> MetricTable::values(const std::string& name) const {
  const auto idx = column_index(name);
  std::vector<double> out;
  for (const auto& row : rows) {
    if (row[idx]) out.push_back(*row[idx]);
  }
  return out;
}

std::vector<std::pair<double, double>> MetricTable::series(const std::string& name) const {
  const auto idx = column_index(name);
  const auto step = column_index("env_step");
  std::vector<std::pair<double, double>> out;
  for (const auto& row : rows) {
    if (row[idx] && row[step]) out.emplace_back(*row[step], *row[idx]);
  }
  return out;
}

MetricTable read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  MetricTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.rfind("# FAILED", 0) == 0) {
        table.failed = true;
        table.failure = line;
      } else if (table.schema_line.empty()) {
        table.schema_line = line;
      }
      continue;
    }
    auto fields = split_csv(line);
    if (table.columns.empty()) {
      table.columns = std::move(fields);
      continue;
    }
    if (fields.size() != table.columns.size()) {
      throw Error(path.string() + ": row has " + std::to_string(fields.size()) + " fields, header has " +
                  std::to_string(table.columns.size()));
    }
    std::vector<std::optional<double>> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      if (f.empty()) {
        row.emplace_back();
      } else {
        std::size_t used = 0;
        const double v = std::stod(f, &used);
        if (used != f.size()) throw Error(path.string() + ": bad number '" + f + "'");
        row.emplace_back(v);
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty()) throw Error(path.string() + ": missing header row");
  return table;
}

double tail_mean(const std::vector<double>& values, std::size_t count) {
  if (values.empty()) return 0.0;
  const std::size_t n = std::min(count, values.size());
  double sum = 0.0;
  for (std::size_t i = values.size() - n; i < values.size(); ++i) sum += values[i];
  return sum / static_cast<double>(n);
}

SeedResult run_seed(const ExperimentConfig& config, std::uint64_t seed, std::ostream* log) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);
  SeedResult result;
  result.seed = seed;
  result.csv_path = config.output_dir / ("seed_" + std::to_string(seed) + ".csv");
  RowWriter writer(result.csv_path, config);
  try {
    if (config.env == EnvKind::kGridWorld) {
      run_gridworld(config, seed, writer, result);
    } else {
      run_pendulum(config, seed, writer, result);
    }
  } catch (const Error& e) {
    result.failed = true;
    result.failure = e.what();
    writer.fail(e.what());
  }
  writer.close();
  result.final_score = tail_mean(result.evaluations, 10);
  if (log != nullptr) {
    *log << "[" << to_string(config.env) << "/" << to_string(config.algo)
         << (config.agent.peer_enabled ? "+peer" : "") << "] seed " << seed << ": "
         << (result.failed ? "FAILED (" + result.failure + ")" : "final score " + cell(std::optional(result.final_score)))
         << std::endl;
  }
  return result;
}

ExperimentSummary run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);
  ExperimentSummary summary;
  summary.seeds.resize(config.seeds.size());

  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
      std::ostringstream local;
      summary.seeds[i] = run_seed(config, config.seeds[i], log != nullptr ? &local : nullptr);
      if (log != nullptr) {
        std::lock_guard lock(log_mutex);
        *log << local.str() << std::flush;
      }
    }
  };
  const int jobs = std::min<int>(config.jobs, static_cast<int>(config.seeds.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  std::vector<double> finals;
  for (const auto& s : summary.seeds) {
    if (!s.failed) finals.push_back(s.final_score);
  }
  if (!finals.empty()) {
    double sum = 0.0;
    for (double f : finals) sum += f;
    summary.mean = sum / static_cast<double>(finals.size());
    summary.std = population_std(finals, summary.mean);
  }

  nlohmann::json doc;
  doc["schema"] = "peerlab-summary v1";
  doc["env"] = std::string(to_string(config.env));
  doc["algo"] = std::string(to_string(config.algo));
  doc["peer_enabled"] = config.agent.peer_enabled;
  doc["beta"] = config.agent.beta;
  doc["final_score"] = "mean of the last 10 evaluations per seed";
  doc["mean"] = summary.mean;
  doc["std"] = summary.std;
  doc["seeds"] = nlohmann::json::array();
  for (const auto& s : summary.seeds) {
    nlohmann::json entry;
    entry["seed"] = s.seed;
    entry["csv"] = s.csv_path.filename().string();
    entry["final_score"] = s.final_score;
    entry["evaluations"] = s.evaluations;
    entry["status"] = s.failed ? "failed" : "ok";
    if (s.failed) entry["failure"] = s.failure;
    doc["seeds"].push_back(entry);
  }
  summary.summary_path = config.output_dir / "summary.json";
  std::ofstream out(summary.summary_path, std::ios::binary);
  out << doc.dump(2) << '\n';
  return summary;
}

}  // namespace peerlab::harness
