#include "peerlab/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "peerlab/errors.hpp"

namespace peerlab::harness {
namespace {

struct Entry {
  std::string key;
  std::string value;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

Entry split_assignment(std::string_view line, const std::string& where) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value', got '" + std::string(line) + "'");
  Entry e{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1)))};
  if (e.key.empty()) throw ConfigError(where + ": empty key");
  return e;
}

double parse_double(const Entry& e) {
  double v = 0.0;
  const char* begin = e.value.data();
  const char* end = begin + e.value.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(e.key, "not a number: '" + e.value + "'");
  return v;
}

template <typename Int>
Int parse_int(const Entry& e) {
  Int v = 0;
  const char* begin = e.value.data();
  const char* end = begin + e.value.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    // Accept integral values written in floating notation, e.g. 1e5.
    double d = 0.0;
    auto [p2, ec2] = std::from_chars(begin, end, d);
    const bool representable = ec2 == std::errc() && p2 == end && d >= static_cast<double>(std::numeric_limits<Int>::min()) &&
                               d <= static_cast<double>(std::numeric_limits<Int>::max());
    if (!representable || d != static_cast<double>(static_cast<Int>(d))) {
      throw ConfigError(e.key, "not an integer: '" + e.value + "'");
    }
    v = static_cast<Int>(d);
  }
  return v;
}

bool parse_bool(const Entry& e) {
  const std::string& v = e.value;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(e.key, "not a boolean: '" + v + "'");
}

template <typename Int>
std::vector<Int> parse_list(const Entry& e) {
  std::vector<Int> out;
  std::string_view rest = e.value;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    out.push_back(parse_int<Int>(Entry{e.key, std::string(item)}));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (out.empty()) throw ConfigError(e.key, "empty list");
  return out;
}

EnvKind parse_env(const Entry& e) {
  if (e.value == "gridworld") return EnvKind::kGridWorld;
  if (e.value == "pendulum") return EnvKind::kPendulum;
  throw ConfigError(e.key, "unknown env '" + e.value + "' (gridworld | pendulum)");
}

AlgoKind parse_algo(const Entry& e) {
  if (e.value == "dqn") return AlgoKind::kDqn;
  if (e.value == "td3") return AlgoKind::kTd3;
  throw ConfigError(e.key, "unknown algo '" + e.value + "' (dqn | td3)");
}

using Setter = std::function<void(ExperimentConfig&, const Entry&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"env", [](auto& c, const Entry& e) { c.env = parse_env(e); }},
      {"algo", [](auto& c, const Entry& e) { c.algo = parse_algo(e); }},
      {"seeds", [](auto& c, const Entry& e) { c.seeds = parse_list<std::uint64_t>(e); }},
      {"total_steps", [](auto& c, const Entry& e) { c.total_steps = parse_int<long>(e); }},
      {"total_episodes", [](auto& c, const Entry& e) { c.total_episodes = parse_int<long>(e); }},
      {"eval_interval", [](auto& c, const Entry& e) { c.eval_interval = parse_int<long>(e); }},
      {"eval_episodes", [](auto& c, const Entry& e) { c.eval_episodes = parse_int<int>(e); }},
      {"metric_interval", [](auto& c, const Entry& e) { c.metric_interval = parse_int<long>(e); }},
      {"output_dir", [](auto& c, const Entry& e) { c.output_dir = e.value; }},
      {"jobs", [](auto& c, const Entry& e) { c.jobs = parse_int<int>(e); }},
      {"peer_enabled", [](auto& c, const Entry& e) { c.agent.peer_enabled = parse_bool(e); }},
      {"beta", [](auto& c, const Entry& e) { c.agent.beta = parse_double(e); }},
      {"gamma", [](auto& c, const Entry& e) { c.agent.gamma = parse_double(e); }},
      {"eta", [](auto& c, const Entry& e) { c.agent.eta = parse_double(e); }},
      {"lr", [](auto& c, const Entry& e) { c.agent.lr = parse_double(e); }},
      {"batch_size", [](auto& c, const Entry& e) { c.agent.batch_size = parse_int<int>(e); }},
      {"buffer_capacity", [](auto& c, const Entry& e) { c.agent.buffer_capacity = parse_int<std::size_t>(e); }},
      {"epsilon", [](auto& c, const Entry& e) { c.agent.epsilon = parse_double(e); }},
      {"warmup_steps", [](auto& c, const Entry& e) { c.agent.warmup_steps = parse_int<long>(e); }},
      {"exploration_noise_std", [](auto& c, const Entry& e) { c.agent.exploration_noise_std = parse_double(e); }},
      {"target_noise_std", [](auto& c, const Entry& e) { c.agent.target_noise_std = parse_double(e); }},
      {"noise_clip", [](auto& c, const Entry& e) { c.agent.noise_clip = parse_double(e); }},
      {"policy_delay", [](auto& c, const Entry& e) { c.agent.policy_delay = parse_int<int>(e); }},
      {"hidden_widths", [](auto& c, const Entry& e) { c.agent.hidden_widths = parse_list<int>(e); }},
  };
  return table;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(EnvKind env) { return env == EnvKind::kGridWorld ? "gridworld" : "pendulum"; }
std::string_view to_string(AlgoKind algo) { return algo == AlgoKind::kDqn ? "dqn" : "td3"; }

ExperimentConfig ExperimentConfig::defaults_for(EnvKind env) {
  ExperimentConfig c;
  c.env = env;
  if (env == EnvKind::kPendulum) {
    c.algo = AlgoKind::kTd3;
    c.agent = agents::AgentConfig::continuous();
    c.eval_interval = 5000;
  }
  return c;
}

void ExperimentConfig::validate() const {
  agent.validate();
  if (seeds.empty()) throw ConfigError("seeds", "need at least one seed");
  if ((env == EnvKind::kGridWorld) != (algo == AlgoKind::kDqn)) {
    throw ConfigError("algo", "gridworld runs dqn and pendulum runs td3");
  }
  if (total_steps < 1) throw ConfigError("total_steps", "must be positive");
  if (total_episodes < 1) throw ConfigError("total_episodes", "must be positive");
  if (eval_interval < 1) throw ConfigError("eval_interval", "must be positive");
  if (eval_episodes < 1) throw ConfigError("eval_episodes", "must be positive");
  if (metric_interval < 1) throw ConfigError("metric_interval", "must be positive");
  if (jobs < 1) throw ConfigError("jobs", "must be positive");
}

ExperimentConfig parse_config_text(std::string_view text, const std::vector<std::string>& overrides) {
  std::vector<Entry> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    entries.push_back(split_assignment(view, "line " + std::to_string(line_no)));
  }
  for (const auto& o : overrides) entries.push_back(split_assignment(o, "override"));

  const auto& table = setters();
  for (const auto& e : entries) {
    if (!table.contains(e.key)) throw ConfigError(e.key, "unknown key");
  }

  // The environment picks the default table; everything else layers on top.
  EnvKind env = EnvKind::kGridWorld;
  for (const auto& e : entries) {
    if (e.key == "env") env = parse_env(e);
  }
  ExperimentConfig config = ExperimentConfig::defaults_for(env);
  for (const auto& e : entries) table.find(e.key)->second(config, e);
  config.validate();
  return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), overrides);
}

std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream out;
  const auto& a = c.agent;
  out << "env = " << to_string(c.env) << "\n"
      << "algo = " << to_string(c.algo) << "\n"
      << "seeds = " << join(c.seeds) << "\n"
      << "total_steps = " << c.total_steps << "\n"
      << "total_episodes = " << c.total_episodes << "\n"
      << "eval_interval = " << c.eval_interval << "\n"
      << "eval_episodes = " << c.eval_episodes << "\n"
      << "metric_interval = " << c.metric_interval << "\n"
      << "output_dir = " << c.output_dir.string() << "\n"
      << "jobs = " << c.jobs << "\n"
      << "peer_enabled = " << (a.peer_enabled ? "true" : "false") << "\n"
      << "beta = " << fmt_double(a.beta) << "\n"
      << "gamma = " << fmt_double(a.gamma) << "\n"
      << "eta = " << fmt_double(a.eta) << "\n"
      << "lr = " << fmt_double(a.lr) << "\n"
      << "batch_size = " << a.batch_size << "\n"
      << "buffer_capacity = " << a.buffer_capacity << "\n"
      << "epsilon = " << fmt_double(a.epsilon) << "\n"
      << "warmup_steps = " << a.warmup_steps << "\n"
      << "exploration_noise_std = " << fmt_double(a.exploration_noise_std) << "\n"
      << "target_noise_std = " << fmt_double(a.target_noise_std) << "\n"
      << "noise_clip = " << fmt_double(a.noise_clip) << "\n"
      << "policy_delay = " << a.policy_delay << "\n"
      << "hidden_widths = " << join(a.hidden_widths) << "\n";
  return out.str();
}

}  // namespace peerlab::harness
