#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpbench {

using PhilosopherId = std::size_t;
using ForkId = std::size_t;

enum class Action { GrabLeft, GrabRight, Release, Wait };
enum class PhilosopherStatus { Hungry, Eating };

/// Wire names: GRAB_LEFT, GRAB_RIGHT, RELEASE, WAIT.
std::string_view to_string(Action action);
std::string_view to_string(PhilosopherStatus status);
/// Exact (case-sensitive) inverse of to_string; nullopt for anything else.
std::optional<Action> action_from_string(std::string_view name);
std::optional<PhilosopherStatus> status_from_string(std::string_view name);

inline constexpr std::size_t kMaxMessageChars = 240;

/// One agent's output for one turn.
struct Decision {
    Action action = Action::Wait;
    std::optional<std::string> message;
    std::string thinking;
    bool parse_ok = true;
    /// Raw completion text for model-backed agents; empty for scripted ones.
    std::string raw;

    static Decision of(Action action) { return Decision{action, std::nullopt, {}, true, {}}; }
};

/// The local view of one philosopher. Holds nothing about the rest of the table.
struct Observation {
    PhilosopherId self_id = 0;
    PhilosopherStatus status = PhilosopherStatus::Hungry;
    unsigned meals_eaten = 0;
    bool holds_left = false;
    bool holds_right = false;
    bool left_fork_available = false;
    bool right_fork_available = false;
    std::optional<std::string> left_message;
    std::optional<std::string> right_message;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Delayed messages waiting for one philosopher, from each neighbour.
struct Inbox {
    std::optional<std::string> from_left;
    std::optional<std::string> from_right;
};

enum class GrabOutcome { None, Succeeded, Failed, NoOp };
std::string_view to_string(GrabOutcome outcome);
std::optional<GrabOutcome> grab_outcome_from_string(std::string_view name);

struct PhilosopherEvent {
    /// Absent for philosophers that did not act (sequential mode).
    std::optional<Action> action;
    GrabOutcome grab = GrabOutcome::None;
    /// Forks dropped by an explicit RELEASE.
    std::vector<ForkId> released;
    bool ate = false;
    /// Forks freed automatically after eating.
    std::vector<ForkId> auto_released;

    friend bool operator==(const PhilosopherEvent&, const PhilosopherEvent&) = default;
};

struct StepEvents {
    std::vector<PhilosopherEvent> philosophers;

    friend bool operator==(const StepEvents&, const StepEvents&) = default;
};

/// Full simulation state. Fork i sits on philosopher i's left and on
/// philosopher (i-1) mod n's right.
class TableState {
public:
    /// Throws ConfigError for n < 3.
    explicit TableState(std::size_t n);

    /// Builds an arbitrary state; only checks shape and fork adjacency.
    /// Throws std::invalid_argument on inconsistent input.
    static TableState from_parts(std::vector<std::optional<PhilosopherId>> fork_owner,
                                 std::vector<PhilosopherStatus> status,
                                 std::vector<unsigned> meals,
                                 unsigned timestep);

    std::size_t size() const { return fork_owner_.size(); }
    unsigned timestep() const { return timestep_; }
    std::span<const std::optional<PhilosopherId>> fork_owners() const { return fork_owner_; }
    std::span<const PhilosopherStatus> statuses() const { return status_; }
    std::span<const unsigned> meals() const { return meals_; }

    std::optional<PhilosopherId> owner(ForkId fork) const { return fork_owner_.at(fork); }
    ForkId left_fork(PhilosopherId pid) const { return pid; }
    ForkId right_fork(PhilosopherId pid) const { return (pid + 1) % size(); }
    PhilosopherId left_neighbor(PhilosopherId pid) const { return (pid + size() - 1) % size(); }
    PhilosopherId right_neighbor(PhilosopherId pid) const { return (pid + 1) % size(); }
    std::size_t forks_held(PhilosopherId pid) const;
    /// Philosopher whose turn it is in sequential mode.
    PhilosopherId next_sequential() const { return timestep_ % size(); }

    friend bool operator==(const TableState&, const TableState&) = default;

private:
    TableState() = default;

    friend class TableMutator;

    std::vector<std::optional<PhilosopherId>> fork_owner_;
    std::vector<PhilosopherStatus> status_;
    std::vector<unsigned> meals_;
    unsigned timestep_ = 0;
};

struct StepResult {
    TableState state;
    StepEvents events;
};

inline TableState new_table(std::size_t n) { return TableState(n); }

/// Local view for `pid`. Messages are copied from `inbox` only when
/// `comms` is set. Throws std::invalid_argument when pid is out of range.
Observation observe(const TableState& table, PhilosopherId pid, const Inbox& inbox = {},
                    bool comms = false);

/// Applies one decision per philosopher in four phases: releases, grabs
/// (contested fork goes to the lower id), eating with auto-release, then
/// the timestep advances.
StepResult apply_simultaneous(const TableState& table, std::span<const Decision> decisions);

/// Applies the action of the philosopher whose turn it is; one action is
/// one timestep. Throws std::invalid_argument for an out-of-turn pid.
StepResult apply_sequential(const TableState& table, PhilosopherId pid, const Decision& decision);

/// True iff every philosopher is hungry and holds exactly one fork.
bool detect_deadlock(const TableState& table);

}  // namespace dpbench
