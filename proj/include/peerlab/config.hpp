#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "peerlab/agents.hpp"

namespace peerlab::harness {

enum class EnvKind { kGridWorld, kPendulum };
enum class AlgoKind { kDqn, kTd3 };

std::string_view to_string(EnvKind env);
std::string_view to_string(AlgoKind algo);

struct ExperimentConfig {
  EnvKind env = EnvKind::kGridWorld;
  AlgoKind algo = AlgoKind::kDqn;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  long total_steps = 1000000;  // continuous control budget (env steps)
  long total_episodes = 2000;  // grid-world budget
  long eval_interval = 10;     // episodes (grid world) or env steps (pendulum)
  int eval_episodes = 10;
  long metric_interval = 100;  // train steps between logged diagnostics
  std::filesystem::path output_dir = "runs";
  int jobs = 1;  // seeds run concurrently
  agents::AgentConfig agent = agents::AgentConfig::gridworld();

  /// Built-in defaults for an environment.
  static ExperimentConfig defaults_for(EnvKind env);

  void validate() const;
};

/// Flat "key = value" text, '#' comments. Values from the text override the
/// built-in defaults for the chosen env; overrides ("key=value") override the
/// text. Unknown keys and unparsable values throw ConfigError naming the key.
ExperimentConfig parse_config_text(std::string_view text, const std::vector<std::string>& overrides = {});
ExperimentConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Canonical "key = value" rendering; parse_config_text(to_config_text(c)) == c.
std::string to_config_text(const ExperimentConfig& config);

}  // namespace peerlab::harness
