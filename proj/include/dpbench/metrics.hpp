#pragma once

#include "dpbench/table.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpbench {

struct EpisodeResult {
    bool deadlocked = false;
    std::optional<unsigned> deadlock_timestep;
    std::vector<unsigned> meals_per_philosopher;
    unsigned meals_total = 0;
    unsigned timesteps_used = 0;
    std::string transcript_path;
};

/// Aggregate metrics of one condition.
struct ConditionReport {
    std::string condition_code;
    std::size_t episodes = 0;
    double deadlock_rate = 0.0;
    double throughput_mean = 0.0;
    double throughput_std = 0.0;
    double fairness_mean = 0.0;
    double fairness_std = 0.0;
    std::optional<double> time_to_deadlock;
    double starvation_mean = 0.0;
    std::optional<double> message_action_consistency;
    /// Episodes where nobody ate; their fairness is taken as 1.0.
    std::size_t zero_meal_episodes = 0;
};

/// A message paired with the action executed in the same decision.
struct MessageAction {
    std::optional<std::string> message;
    Action action = Action::Wait;
};

struct GiniResult {
    double value = 0.0;
    bool zero_total = false;
};

struct FairnessResult {
    double value = 1.0;
    bool zero_total = false;
};

double deadlock_rate(std::span<const EpisodeResult> results);
/// Mean over episodes of meals/timesteps.
double throughput(std::span<const EpisodeResult> results);
/// Gini over the meal distribution; 0 with zero_total set when nobody ate.
GiniResult gini(std::span<const unsigned> meals);
/// 1 - normalized Gini. Throws for fewer than two philosophers.
FairnessResult fairness(std::span<const unsigned> meals);
std::optional<double> time_to_deadlock(std::span<const EpisodeResult> results);
std::size_t starvation_count(const EpisodeResult& result);

/// Intent stated by a free-text message, if exactly one can be read off it.
std::optional<Action> extract_intent(std::string_view message);

/// Percentage of decisions with a readable intent whose executed action
/// matches it. Absent when no such decision exists.
std::optional<double> message_action_consistency(std::span<const MessageAction> decisions);

/// `decisions` holds every message-bearing decision of the condition's
/// episodes; pass comms=false to leave MAC absent.
ConditionReport aggregate_condition(std::span<const EpisodeResult> results,
                                    std::span<const MessageAction> decisions, bool comms,
                                    std::string condition_code);

}  // namespace dpbench
