#include "dpbench/errors.hpp"
#include "dpbench/table.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace dpbench;

namespace {

std::vector<Decision> all(std::size_t n, Action a) { return std::vector<Decision>(n, Decision::of(a)); }

std::size_t free_forks(const TableState& t)
{
    std::size_t k = 0;
    for (const auto& o : t.fork_owners()) k += !o.has_value();
    return k;
}

}  // namespace

TEST_CASE("new_table")
{
    const auto t = new_table(5);
    CHECK(t.size() == 5);
    CHECK(t.timestep() == 0);
    CHECK(free_forks(t) == 5);
    for (auto s : t.statuses()) CHECK(s == PhilosopherStatus::Hungry);
    CHECK(std::vector<unsigned>(t.meals().begin(), t.meals().end()) == std::vector<unsigned>{0, 0, 0, 0, 0});

    const auto t3 = new_table(3);
    CHECK(free_forks(t3) == 3);
    CHECK(t3.timestep() == 0);

    CHECK_THROWS_AS(new_table(2), ConfigError);
    CHECK_THROWS_AS(new_table(0), ConfigError);
}

TEST_CASE("fork layout")
{
    const auto t = new_table(5);
    CHECK(t.left_fork(0) == 0);
    CHECK(t.right_fork(0) == 1);
    CHECK(t.right_fork(4) == 0);
    CHECK(t.left_neighbor(0) == 4);
    CHECK(t.right_neighbor(4) == 0);
}

TEST_CASE("from_parts rejects non-adjacent owners")
{
    // fork 0 sits between P0 and P(n-1)
    CHECK_THROWS_AS(TableState::from_parts({1, std::nullopt, std::nullopt}, std::vector(3, PhilosopherStatus::Hungry),
                                           {0, 0, 0}, 0),
                    std::invalid_argument);
    CHECK_NOTHROW(TableState::from_parts({2, std::nullopt, std::nullopt}, std::vector(3, PhilosopherStatus::Hungry),
                                         {0, 0, 0}, 0)
                      .size());
    CHECK_THROWS_AS(TableState::from_parts({2, std::nullopt, std::nullopt, std::nullopt},
                                           std::vector(4, PhilosopherStatus::Hungry), {0, 0, 0, 0}, 0),
                    std::invalid_argument);
}

TEST_CASE("observe")
{
    const auto fresh = new_table(5);
    const auto o = observe(fresh, 0);
    CHECK_FALSE(o.holds_left);
    CHECK_FALSE(o.holds_right);
    CHECK(o.left_fork_available);
    CHECK(o.right_fork_available);

    SUBCASE("neighbour owns my right fork")
    {
        const auto t = TableState::from_parts({std::nullopt, 1, std::nullopt, std::nullopt, std::nullopt},
                                              std::vector(5, PhilosopherStatus::Hungry), {0, 0, 0, 0, 0}, 0);
        const auto o0 = observe(t, 0);
        CHECK(o0.left_fork_available);
        CHECK_FALSE(o0.right_fork_available);
        const auto o1 = observe(t, 1);
        CHECK(o1.holds_left);
        CHECK_FALSE(o1.left_fork_available);
    }

    SUBCASE("messages only with comms")
    {
        Inbox inbox{"from P4", "from P1"};
        const auto quiet = observe(fresh, 0, inbox, false);
        CHECK_FALSE(quiet.left_message.has_value());
        CHECK_FALSE(quiet.right_message.has_value());
        const auto loud = observe(fresh, 0, inbox, true);
        CHECK(loud.left_message == "from P4");
        CHECK(loud.right_message == "from P1");
    }

    CHECK_THROWS_AS(observe(fresh, 5), std::invalid_argument);
}

TEST_CASE("apply_simultaneous: contested fork goes to the lower id")
{
    const auto t = new_table(5);
    auto decisions = all(5, Action::Wait);
    decisions[2] = Decision::of(Action::GrabRight);  // fork 3
    decisions[3] = Decision::of(Action::GrabLeft);   // fork 3
    const auto [next, events] = apply_simultaneous(t, decisions);
    CHECK(next.owner(3) == PhilosopherId{2});
    CHECK(events.philosophers[2].grab == GrabOutcome::Succeeded);
    CHECK(events.philosophers[3].grab == GrabOutcome::Failed);
    CHECK(next.timestep() == 1);
}

TEST_CASE("apply_simultaneous: fork 0 contested by P0 and the last philosopher")
{
    const auto t = new_table(3);
    std::vector<Decision> d{Decision::of(Action::GrabLeft), Decision::of(Action::Wait), Decision::of(Action::GrabRight)};
    const auto [next, events] = apply_simultaneous(t, d);
    CHECK(next.owner(0) == PhilosopherId{0});
    CHECK(events.philosophers[2].grab == GrabOutcome::Failed);
}

TEST_CASE("apply_simultaneous: all grab left on a fresh table")
{
    const auto [next, events] = apply_simultaneous(new_table(3), all(3, Action::GrabLeft));
    for (PhilosopherId p = 0; p < 3; ++p) {
        CHECK(next.owner(p) == p);
        CHECK(events.philosophers[p].grab == GrabOutcome::Succeeded);
        CHECK_FALSE(events.philosophers[p].ate);
    }
    CHECK(detect_deadlock(next));
}

TEST_CASE("apply_simultaneous: second fork means a meal and auto-release")
{
    const auto t = TableState::from_parts({0, std::nullopt, std::nullopt, std::nullopt, std::nullopt},
                                          std::vector(5, PhilosopherStatus::Hungry), {0, 0, 0, 0, 0}, 0);
    auto d = all(5, Action::Wait);
    d[0] = Decision::of(Action::GrabRight);
    const auto [next, events] = apply_simultaneous(t, d);
    CHECK(next.meals()[0] == 1);
    CHECK_FALSE(next.owner(0).has_value());
    CHECK_FALSE(next.owner(1).has_value());
    CHECK(events.philosophers[0].ate);
    CHECK(events.philosophers[0].auto_released == std::vector<ForkId>{0, 1});
    CHECK(next.statuses()[0] == PhilosopherStatus::Hungry);
}

TEST_CASE("apply_simultaneous: released fork is grabbable in the same step")
{
    // P1 holds fork 1 and releases; P0 holds fork 0 and grabs fork 1.
    const auto t = TableState::from_parts({0, 1, std::nullopt}, std::vector(3, PhilosopherStatus::Hungry), {0, 0, 0}, 4);
    std::vector<Decision> d{Decision::of(Action::GrabRight), Decision::of(Action::Release), Decision::of(Action::Wait)};
    const auto [next, events] = apply_simultaneous(t, d);
    CHECK(events.philosophers[1].released == std::vector<ForkId>{1});
    CHECK(events.philosophers[0].ate);
    CHECK(next.meals()[0] == 1);
    CHECK(next.timestep() == 5);
}

TEST_CASE("apply_simultaneous: no-ops and failures")
{
    const auto t = TableState::from_parts({0, 1, std::nullopt}, std::vector(3, PhilosopherStatus::Hungry), {0, 0, 0}, 0);
    std::vector<Decision> d{Decision::of(Action::GrabLeft), Decision::of(Action::Wait), Decision::of(Action::GrabRight)};
    const auto [next, events] = apply_simultaneous(t, d);
    CHECK(events.philosophers[0].grab == GrabOutcome::NoOp);
    CHECK(events.philosophers[2].grab == GrabOutcome::Failed);
    CHECK(next.fork_owners()[0] == t.fork_owners()[0]);

    // release while holding nothing
    const auto [n2, e2] = apply_simultaneous(new_table(3), all(3, Action::Release));
    CHECK(n2.fork_owners()[0] == std::nullopt);
    CHECK(e2.philosophers[0].released.empty());
}

TEST_CASE("apply_simultaneous: unparsed decisions act as WAIT")
{
    auto d = all(3, Action::GrabLeft);
    d[1].parse_ok = false;
    const auto [next, events] = apply_simultaneous(new_table(3), d);
    CHECK_FALSE(next.owner(1).has_value());
    CHECK(events.philosophers[1].action == Action::Wait);
}

TEST_CASE("apply_simultaneous: wrong decision count")
{
    CHECK_THROWS_AS(apply_simultaneous(new_table(3), all(2, Action::Wait)), std::invalid_argument);
}

TEST_CASE("apply_sequential")
{
    const auto [t1, e1] = apply_sequential(new_table(5), 0, Decision::of(Action::GrabLeft));
    CHECK(t1.owner(0) == PhilosopherId{0});
    CHECK(t1.timestep() == 1);
    CHECK_FALSE(e1.philosophers[1].action.has_value());

    const auto held = TableState::from_parts({0, std::nullopt, std::nullopt, std::nullopt, std::nullopt},
                                             std::vector(5, PhilosopherStatus::Hungry), {0, 0, 0, 0, 0}, 0);
    const auto [t2, e2] = apply_sequential(held, 0, Decision::of(Action::GrabRight));
    CHECK(t2.meals()[0] == 1);
    for (const auto& o : t2.fork_owners()) CHECK_FALSE(o.has_value());

    CHECK_THROWS_AS(apply_sequential(new_table(5), 1, Decision::of(Action::Wait)), std::invalid_argument);
    CHECK(t1.next_sequential() == 1);
}

TEST_CASE("detect_deadlock")
{
    const auto circular = TableState::from_parts({0, 1, 2, 3, 4}, std::vector(5, PhilosopherStatus::Hungry),
                                                 {0, 0, 0, 0, 0}, 1);
    CHECK(detect_deadlock(circular));
    CHECK_FALSE(detect_deadlock(new_table(5)));
    const auto two_forks =
        TableState::from_parts({0, 0, std::nullopt}, std::vector(3, PhilosopherStatus::Hungry), {0, 0, 0}, 0);
    CHECK_FALSE(detect_deadlock(two_forks));
    auto statuses = std::vector(5, PhilosopherStatus::Hungry);
    statuses[2] = PhilosopherStatus::Eating;
    CHECK_FALSE(detect_deadlock(TableState::from_parts({0, 1, 2, 3, 4}, statuses, {0, 0, 0, 0, 0}, 1)));
}

TEST_CASE("symmetric convergence: all grab left deadlocks after one step for any n")
{
    for (std::size_t n = 3; n <= 12; ++n) {
        const auto [next, events] = apply_simultaneous(new_table(n), all(n, Action::GrabLeft));
        CHECK(detect_deadlock(next));
        CHECK(next.timestep() == 1);
    }
}

TEST_CASE("random walks keep the table invariants")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng() % 6;
        const bool sequential = rng() % 2;
        auto table = new_table(n);
        std::vector<unsigned> prev_meals(n, 0);
        for (int step = 0; step < 40; ++step) {
            StepResult r = [&] {
                if (sequential)
                    return apply_sequential(table, table.next_sequential(), Decision::of(static_cast<Action>(rng() % 4)));
                std::vector<Decision> d;
                for (std::size_t p = 0; p < n; ++p) d.push_back(Decision::of(static_cast<Action>(rng() % 4)));
                const auto again = apply_simultaneous(table, d);
                // purity: same inputs, same outputs
                const auto twice = apply_simultaneous(table, d);
                CHECK(again.state == twice.state);
                CHECK(again.events == twice.events);
                return again;
            }();

            std::size_t held = 0;
            for (PhilosopherId p = 0; p < n; ++p) {
                CHECK(r.state.forks_held(p) <= 1);  // auto-release fired
                held += r.state.forks_held(p);
                CHECK(r.state.meals()[p] >= prev_meals[p]);
                CHECK(r.state.statuses()[p] == PhilosopherStatus::Hungry);
            }
            CHECK(held + free_forks(r.state) == n);

            // successful grabs correspond to ownership changes (or meals)
            for (PhilosopherId p = 0; p < n; ++p) {
                const auto& ev = r.events.philosophers[p];
                if (ev.grab != GrabOutcome::Succeeded) continue;
                const ForkId f = ev.action == Action::GrabLeft ? table.left_fork(p) : table.right_fork(p);
                CHECK((r.state.owner(f) == p || ev.ate));
                CHECK(table.owner(f) != p);
            }
            prev_meals.assign(r.state.meals().begin(), r.state.meals().end());
            table = r.state;
        }
    }
}

TEST_CASE("detector agrees with the wait-for-graph oracle on every n=3 state")
{
    const std::size_t n = 3;
    std::size_t disagreements = 0;
    std::size_t deadlocks = 0;
    // each fork: free, left-side owner, right-side owner
    for (unsigned owners = 0; owners < 27; ++owners) {
        std::vector<std::optional<std::size_t>> fork_owner(n);
        unsigned code = owners;
        for (ForkId f = 0; f < n; ++f, code /= 3) {
            const unsigned c = code % 3;
            if (c == 1) fork_owner[f] = f;
            if (c == 2) fork_owner[f] = (f + n - 1) % n;
        }
        for (unsigned statuses = 0; statuses < 8; ++statuses) {
            std::vector<PhilosopherStatus> st(n);
            std::vector<bool> hungry(n);
            for (PhilosopherId p = 0; p < n; ++p) {
                hungry[p] = !(statuses >> p & 1u);
                st[p] = hungry[p] ? PhilosopherStatus::Hungry : PhilosopherStatus::Eating;
            }
            const auto table = TableState::from_parts(fork_owner, st, {0, 0, 0}, 0);
            const bool detected = detect_deadlock(table);
            deadlocks += detected;
            disagreements += detected != oracle::circular_wait_deadlock(fork_owner, hungry);
        }
    }
    CHECK(disagreements == 0);
    CHECK(deadlocks == 2);  // everyone-left and everyone-right
}
