#include "dpbench/table.hpp"

#include "dpbench/errors.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace dpbench {

namespace {

constexpr std::array<std::pair<Action, std::string_view>, 4> kActionNames{{
    {Action::GrabLeft, "GRAB_LEFT"},
    {Action::GrabRight, "GRAB_RIGHT"},
    {Action::Release, "RELEASE"},
    {Action::Wait, "WAIT"},
}};

constexpr std::array<std::pair<GrabOutcome, std::string_view>, 4> kGrabNames{{
    {GrabOutcome::None, "none"},
    {GrabOutcome::Succeeded, "succeeded"},
    {GrabOutcome::Failed, "failed"},
    {GrabOutcome::NoOp, "noop"},
}};

}  // namespace

std::string_view to_string(Action action)
{
    for (const auto& [a, name] : kActionNames)
        if (a == action) return name;
    return "WAIT";
}

std::optional<Action> action_from_string(std::string_view name)
{
    for (const auto& [a, n] : kActionNames)
        if (n == name) return a;
    return std::nullopt;
}

std::string_view to_string(PhilosopherStatus status)
{
    return status == PhilosopherStatus::Eating ? "EATING" : "HUNGRY";
}

std::optional<PhilosopherStatus> status_from_string(std::string_view name)
{
    if (name == "HUNGRY") return PhilosopherStatus::Hungry;
    if (name == "EATING") return PhilosopherStatus::Eating;
    return std::nullopt;
}

std::string_view to_string(GrabOutcome outcome)
{
    for (const auto& [g, name] : kGrabNames)
        if (g == outcome) return name;
    return "none";
}

std::optional<GrabOutcome> grab_outcome_from_string(std::string_view name)
{
    for (const auto& [g, n] : kGrabNames)
        if (n == name) return g;
    return std::nullopt;
}

TableState::TableState(std::size_t n)
{
    if (n < 3)
        throw ConfigError("a table needs at least 3 philosophers, got " + std::to_string(n));
    fork_owner_.assign(n, std::nullopt);
    status_.assign(n, PhilosopherStatus::Hungry);
    meals_.assign(n, 0);
}

TableState TableState::from_parts(std::vector<std::optional<PhilosopherId>> fork_owner,
                                  std::vector<PhilosopherStatus> status,
                                  std::vector<unsigned> meals,
                                  unsigned timestep)
{
    const std::size_t n = fork_owner.size();
    if (n < 3) throw ConfigError("a table needs at least 3 philosophers");
    if (status.size() != n || meals.size() != n)
        throw std::invalid_argument("fork, status and meal vectors differ in length");
    for (ForkId f = 0; f < n; ++f) {
        if (!fork_owner[f]) continue;
        const PhilosopherId p = *fork_owner[f];
        // fork f is the left fork of f and the right fork of f-1
        if (p != f && p != (f + n - 1) % n)
            throw std::invalid_argument("fork " + std::to_string(f) + " owned by non-adjacent philosopher "
                                        + std::to_string(p));
    }
    TableState t;
    t.fork_owner_ = std::move(fork_owner);
    t.status_ = std::move(status);
    t.meals_ = std::move(meals);
    t.timestep_ = timestep;
    return t;
}

std::size_t TableState::forks_held(PhilosopherId pid) const
{
    return static_cast<std::size_t>(
        std::count(fork_owner_.begin(), fork_owner_.end(), std::optional<PhilosopherId>{pid}));
}

Observation observe(const TableState& table, PhilosopherId pid, const Inbox& inbox, bool comms)
{
    if (pid >= table.size())
        throw std::invalid_argument("philosopher " + std::to_string(pid) + " out of range");
    const auto left = table.owner(table.left_fork(pid));
    const auto right = table.owner(table.right_fork(pid));
    Observation obs;
    obs.self_id = pid;
    obs.status = table.statuses()[pid];
    obs.meals_eaten = table.meals()[pid];
    obs.holds_left = left == pid;
    obs.holds_right = right == pid;
    obs.left_fork_available = !left.has_value();
    obs.right_fork_available = !right.has_value();
    if (comms) {
        obs.left_message = inbox.from_left;
        obs.right_message = inbox.from_right;
    }
    return obs;
}

class TableMutator {
public:
    // `actions[p]` is empty for philosophers that do not act this timestep.
    static StepResult apply(const TableState& table, std::span<const std::optional<Action>> actions)
    {
        const std::size_t n = table.size();
        TableState next = table;
        StepEvents events;
        events.philosophers.resize(n);
        for (PhilosopherId p = 0; p < n; ++p) events.philosophers[p].action = actions[p];

        // Phase 1: releases.
        for (PhilosopherId p = 0; p < n; ++p) {
            if (actions[p] != Action::Release) continue;
            for (ForkId f : {table.left_fork(p), table.right_fork(p)}) {
                if (next.fork_owner_[f] == p) {
                    next.fork_owner_[f].reset();
                    events.philosophers[p].released.push_back(f);
                }
            }
        }

        // Phase 2: grabs, resolved against the post-release state. Iterating
        // in id order hands a contested free fork to the lowest id.
        std::vector<std::optional<PhilosopherId>> claimed(n);
        for (PhilosopherId p = 0; p < n; ++p) {
            if (actions[p] != Action::GrabLeft && actions[p] != Action::GrabRight) continue;
            const ForkId f = actions[p] == Action::GrabLeft ? table.left_fork(p) : table.right_fork(p);
            auto& ev = events.philosophers[p];
            if (next.fork_owner_[f] == p) {
                ev.grab = GrabOutcome::NoOp;
            } else if (next.fork_owner_[f].has_value() || claimed[f].has_value()) {
                ev.grab = GrabOutcome::Failed;
            } else {
                claimed[f] = p;
                ev.grab = GrabOutcome::Succeeded;
            }
        }
        for (ForkId f = 0; f < n; ++f)
            if (claimed[f]) next.fork_owner_[f] = claimed[f];

        // Phase 3: anyone holding both forks eats, then both are freed.
        for (PhilosopherId p = 0; p < n; ++p) {
            const ForkId l = table.left_fork(p);
            const ForkId r = table.right_fork(p);
            if (next.fork_owner_[l] == p && next.fork_owner_[r] == p) {
                auto& ev = events.philosophers[p];
                ev.ate = true;
                ev.auto_released = {l, r};
                ++next.meals_[p];
                next.fork_owner_[l].reset();
                next.fork_owner_[r].reset();
            }
        }

        // Phase 4.
        std::fill(next.status_.begin(), next.status_.end(), PhilosopherStatus::Hungry);
        ++next.timestep_;
        return {std::move(next), std::move(events)};
    }
};

StepResult apply_simultaneous(const TableState& table, std::span<const Decision> decisions)
{
    if (decisions.size() != table.size())
        throw std::invalid_argument("expected " + std::to_string(table.size()) + " decisions, got "
                                    + std::to_string(decisions.size()));
    std::vector<std::optional<Action>> actions;
    actions.reserve(decisions.size());
    for (const auto& d : decisions) actions.emplace_back(d.parse_ok ? d.action : Action::Wait);
    return TableMutator::apply(table, actions);
}

StepResult apply_sequential(const TableState& table, PhilosopherId pid, const Decision& decision)
{
    if (pid >= table.size())
        throw std::invalid_argument("philosopher " + std::to_string(pid) + " out of range");
    if (pid != table.next_sequential())
        throw std::invalid_argument("philosopher " + std::to_string(pid) + " acted out of turn; expected "
                                    + std::to_string(table.next_sequential()));
    std::vector<std::optional<Action>> actions(table.size());
    actions[pid] = decision.parse_ok ? decision.action : Action::Wait;
    return TableMutator::apply(table, actions);
}

bool detect_deadlock(const TableState& table)
{
    for (PhilosopherId p = 0; p < table.size(); ++p) {
        if (table.statuses()[p] != PhilosopherStatus::Hungry) return false;
        if (table.forks_held(p) != 1) return false;
    }
    return true;
}

}  // namespace dpbench
