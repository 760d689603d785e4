#pragma once

#include "dpbench/table.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dpbench {

enum class Mode { Simultaneous, Sequential };

struct EpisodeConfig {
    Mode mode = Mode::Simultaneous;
    std::size_t n = 5;
    bool comms = false;
};

/// Per-slot context. Each philosopher slot owns its own random stream, so
/// decisions do not depend on the order in which slots are evaluated.
struct PolicyContext {
    EpisodeConfig episode;
    std::mt19937_64 rng;

    PolicyContext(EpisodeConfig episode, std::uint64_t episode_seed, PhilosopherId pid);
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual Decision decide(const Observation& obs, PolicyContext& ctx) = 0;
    virtual std::string_view name() const = 0;
    /// Request/response record of the last decide() call, for transcripts.
    virtual std::optional<nlohmann::json> take_trace() { return std::nullopt; }
};

enum class Side { Left, Right };

// Scripted baselines. Each is a pure function of the observation and the
// context's random stream; none of them sends messages.

/// Takes the `first` fork when free, then the other one; never releases.
Decision greedy_policy(const Observation& obs, Side first);
inline Decision greedy_left_policy(const Observation& obs, const PolicyContext&)
{
    return greedy_policy(obs, Side::Left);
}
inline Decision greedy_right_policy(const Observation& obs, const PolicyContext&)
{
    return greedy_policy(obs, Side::Right);
}

/// Resource hierarchy: lower-numbered adjacent fork first.
Decision dijkstra_hierarchy_policy(const Observation& obs, const PolicyContext& ctx);

/// Uniform over the four actions.
Decision random_policy(const Observation& obs, PolicyContext& ctx);

/// Greedy-left, except that holding one fork with the other taken releases.
Decision polite_policy(const Observation& obs, const PolicyContext& ctx);

/// Adapts one of the free functions above to the Policy interface.
class ScriptedPolicy final : public Policy {
public:
    using Fn = Decision (*)(const Observation&, PolicyContext&);

    ScriptedPolicy(std::string name, Fn fn) : name_(std::move(name)), fn_(fn) {}

    Decision decide(const Observation& obs, PolicyContext& ctx) override { return fn_(obs, ctx); }
    std::string_view name() const override { return name_; }

private:
    std::string name_;
    Fn fn_;
};

/// Names accepted by make_scripted_policy.
const std::vector<std::string>& scripted_policy_names();

/// Throws ConfigError for unknown names ("llm" is not scripted).
std::unique_ptr<Policy> make_scripted_policy(std::string_view name);

}  // namespace dpbench
