#pragma once

#include "dpbench/llm_agent.hpp"
#include "dpbench/metrics.hpp"
#include "dpbench/policies.hpp"
#include "dpbench/table.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dpbench {

struct ConditionCode {
    Mode mode = Mode::Simultaneous;
    std::size_t n = 5;
    bool comms = false;

    /// "sim5nc", "seq3c", ...
    std::string to_string() const;
    EpisodeConfig episode_config() const { return {mode, n, comms}; }
    friend bool operator==(const ConditionCode&, const ConditionCode&) = default;
};

/// The eight standard codes in their canonical order.
const std::vector<std::string>& standard_condition_codes();

/// Accepts (sim|seq)<n>(c|nc) with n >= 3. Throws ConfigError listing the
/// standard codes otherwise.
ConditionCode parse_condition(std::string_view code);

std::string_view to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view name);

struct RunConfig {
    ConditionCode condition;
    std::size_t episodes = 20;
    unsigned max_timesteps = 30;
    std::uint64_t seed = 42;
    /// One name for every seat, or one per seat.
    std::vector<std::string> policies{"greedy-left"};
    std::optional<LlmEndpointConfig> endpoint;
    /// Transcripts go to <output_dir>/<condition>/ep<k>.jsonl; empty keeps
    /// them in memory only.
    std::filesystem::path output_dir;
    /// Fan out the decisions of a simultaneous timestep onto threads.
    bool concurrent_decisions = false;

    std::uint64_t episode_seed(std::size_t episode_index) const { return seed + episode_index; }
    /// Policy name of one seat.
    const std::string& policy_for(PhilosopherId pid) const;
};

/// Latest message each philosopher sent, delivered to both neighbours on
/// their next observation after the sending timestep.
class MessageBus {
public:
    explicit MessageBus(std::size_t n) : latest_(n) {}

    /// Outbox: `message` replaces whatever `sender` said before.
    void post(PhilosopherId sender, std::optional<std::string> message, unsigned timestep);
    Inbox inbox(PhilosopherId pid) const;
    /// Timestep at which the message currently held for `sender` was posted.
    std::optional<unsigned> sent_at(PhilosopherId sender) const;

private:
    struct Slot {
        std::optional<std::string> message;
        std::optional<unsigned> timestep;
    };
    std::vector<Slot> latest_;
};

using PolicySet = std::vector<std::unique_ptr<Policy>>;
using PolicyFactory = std::function<PolicySet(const RunConfig&)>;

/// Builds scripted policies, plus model-backed ones sharing `accounting`
/// when a seat is "llm" (which requires config.endpoint).
PolicyFactory default_policy_factory(std::shared_ptr<SharedAccounting> accounting = nullptr);

struct EpisodeOutcome {
    EpisodeResult result;
    /// JSONL records: header, one per timestep, result.
    std::vector<nlohmann::json> transcript;
    /// Every decision that carried a message, for message-action consistency.
    std::vector<MessageAction> message_actions;
};

/// Runs until deadlock or max_timesteps. Model failures surface as RunError.
EpisodeOutcome run_episode(const RunConfig& config, std::size_t episode_index, std::span<const std::unique_ptr<Policy>> policies,
                           const SharedAccounting* accounting = nullptr);

struct ConditionRun {
    ConditionReport report;
    std::vector<EpisodeOutcome> episodes;
    std::optional<CallAccounting> accounting;
};

/// Runs config.episodes episodes with fresh policies each, writes the
/// transcripts when an output directory is set (removing ep<k>.jsonl files
/// of that condition with k >= episodes), and aggregates. Pass the
/// accounting the factory's model clients record into to get per-episode
/// and per-run cost figures.
ConditionRun run_condition(const RunConfig& config, const PolicyFactory& factory,
                           std::shared_ptr<SharedAccounting> accounting = nullptr);
/// Same, with default_policy_factory.
ConditionRun run_condition(const RunConfig& config);

/// <output_dir>/<condition>/ep<k>.jsonl
std::filesystem::path transcript_path(const RunConfig& config, std::size_t episode_index);

}  // namespace dpbench
