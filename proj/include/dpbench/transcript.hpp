#pragma once

#include "dpbench/metrics.hpp"
#include "dpbench/runner.hpp"
#include "dpbench/table.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

// One JSONL file per episode:
//   {"record":"header", condition, mode, n, comms, episode, seed, episode_seed,
//    max_timesteps, policies[, endpoint]}
//   {"record":"step", timestep, actors, observations, decisions, events,
//    state, deadlock}                                    -- one per timestep
//   {"record":"result", deadlocked, deadlock_timestep, meals, meals_total,
//    timesteps_used[, accounting]}

namespace dpbench {

inline constexpr std::string_view kTranscriptFormat = "dpbench-transcript/1";

nlohmann::json to_json(const Observation& obs);
nlohmann::json to_json(const Decision& decision, PhilosopherId pid);
nlohmann::json to_json(const PhilosopherEvent& event, PhilosopherId pid);
nlohmann::json to_json(const TableState& table);
nlohmann::json to_json(const EpisodeResult& result);

Observation observation_from_json(const nlohmann::json& j);
Decision decision_from_json(const nlohmann::json& j);
PhilosopherEvent event_from_json(const nlohmann::json& j);

struct Transcript {
    nlohmann::json header;
    std::vector<nlohmann::json> steps;
    nlohmann::json result;

    ConditionCode condition() const;
    EpisodeResult episode_result() const;
    std::vector<MessageAction> message_actions() const;
};

/// Throws std::runtime_error on unreadable or structurally invalid input.
Transcript parse_transcript(const std::vector<nlohmann::json>& records);
Transcript load_transcript(const std::filesystem::path& path);

/// JSONL text exactly as written to disk.
std::string serialize_records(const std::vector<nlohmann::json>& records);
void write_transcript(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);

struct ReplayReport {
    bool ok = true;
    std::size_t steps_checked = 0;
    std::vector<std::string> mismatches;
};

/// Re-runs the recorded decisions from a fresh table and checks every
/// recorded observation, event list, post-state, deadlock flag and the
/// final result.
ReplayReport replay_transcript(const Transcript& transcript);

struct MessageDelayReport {
    std::size_t messages_checked = 0;
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Every message seen in an observation at timestep t must be the latest
/// one its sender emitted before t; in simultaneous mode exactly at t-1.
MessageDelayReport verify_message_delay(const Transcript& transcript);

}  // namespace dpbench
