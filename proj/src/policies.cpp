#include "dpbench/policies.hpp"

#include "dpbench/errors.hpp"

#include <array>

namespace dpbench {

PolicyContext::PolicyContext(EpisodeConfig episode_config, std::uint64_t episode_seed, PhilosopherId pid)
    : episode(episode_config)
{
    std::seed_seq seq{static_cast<std::uint32_t>(episode_seed & 0xffffffffu),
                      static_cast<std::uint32_t>(episode_seed >> 32), static_cast<std::uint32_t>(pid)};
    rng.seed(seq);
}

Decision greedy_policy(const Observation& obs, Side first)
{
    const bool holds_first = first == Side::Left ? obs.holds_left : obs.holds_right;
    const bool first_free = first == Side::Left ? obs.left_fork_available : obs.right_fork_available;
    const bool second_free = first == Side::Left ? obs.right_fork_available : obs.left_fork_available;
    const Action grab_first = first == Side::Left ? Action::GrabLeft : Action::GrabRight;
    const Action grab_second = first == Side::Left ? Action::GrabRight : Action::GrabLeft;

    if (!holds_first && first_free) return Decision::of(grab_first);
    if (holds_first && second_free) return Decision::of(grab_second);
    return Decision::of(Action::Wait);
}

Decision dijkstra_hierarchy_policy(const Observation& obs, const PolicyContext& ctx)
{
    const ForkId left = obs.self_id;
    const ForkId right = (obs.self_id + 1) % ctx.episode.n;
    return greedy_policy(obs, left < right ? Side::Left : Side::Right);
}

Decision random_policy(const Observation&, PolicyContext& ctx)
{
    static constexpr std::array<Action, 4> kActions{Action::GrabLeft, Action::GrabRight, Action::Release,
                                                    Action::Wait};
    // mt19937_64 output is fully specified; 2^64 is divisible by 4, so the
    // modulo is unbiased and identical across standard libraries.
    return Decision::of(kActions[ctx.rng() % kActions.size()]);
}

Decision polite_policy(const Observation& obs, const PolicyContext& ctx)
{
    if (obs.holds_left != obs.holds_right) {
        const bool other_free = obs.holds_left ? obs.right_fork_available : obs.left_fork_available;
        if (!other_free) return Decision::of(Action::Release);
    }
    return greedy_left_policy(obs, ctx);
}

namespace {

Decision greedy_left_fn(const Observation& o, PolicyContext& c) { return greedy_left_policy(o, c); }
Decision greedy_right_fn(const Observation& o, PolicyContext& c) { return greedy_right_policy(o, c); }
Decision dijkstra_fn(const Observation& o, PolicyContext& c) { return dijkstra_hierarchy_policy(o, c); }
Decision polite_fn(const Observation& o, PolicyContext& c) { return polite_policy(o, c); }

struct Entry {
    std::string_view name;
    ScriptedPolicy::Fn fn;
};

constexpr std::array<Entry, 5> kScripted{{
    {"greedy-left", greedy_left_fn},
    {"greedy-right", greedy_right_fn},
    {"dijkstra", dijkstra_fn},
    {"random", random_policy},
    {"polite", polite_fn},
}};

}  // namespace

const std::vector<std::string>& scripted_policy_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& e : kScripted) v.emplace_back(e.name);
        return v;
    }();
    return names;
}

std::unique_ptr<Policy> make_scripted_policy(std::string_view name)
{
    for (const auto& e : kScripted)
        if (e.name == name) return std::make_unique<ScriptedPolicy>(std::string(name), e.fn);
    throw ConfigError("unknown policy '" + std::string(name)
                      + "' (expected greedy-left, greedy-right, dijkstra, random, polite or llm)");
}

}  // namespace dpbench
