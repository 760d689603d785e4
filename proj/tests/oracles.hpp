// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the metric or detector code it is compared with.
#pragma once

#include "dpbench/table.hpp"

#include <cstdlib>
#include <functional>
#include <optional>
#include <set>
#include <vector>

namespace dpbench::oracle {

/// Gini via mean absolute difference: sum_{i,j} |m_i - m_j| / (2 N sum m).
inline double pairwise_gini(const std::vector<unsigned>& m)
{
    double diff = 0.0;
    double total = 0.0;
    for (unsigned a : m) {
        total += a;
        for (unsigned b : m) diff += std::abs(static_cast<double>(a) - static_cast<double>(b));
    }
    return diff / (2.0 * static_cast<double>(m.size()) * total);
}

/// Wait-for graph over philosophers: a hungry philosopher holding exactly one
/// fork waits on whoever owns its other fork. Returns true when the graph
/// has a cycle (colour-marking DFS).
inline bool wait_for_cycle(const std::vector<std::optional<std::size_t>>& fork_owner,
                           const std::vector<bool>& hungry)
{
    const std::size_t n = fork_owner.size();
    std::vector<std::vector<std::size_t>> edges(n);
    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t l = p;
        const std::size_t r = (p + 1) % n;
        const bool has_l = fork_owner[l] == p;
        const bool has_r = fork_owner[r] == p;
        if (!hungry[p] || has_l == has_r) continue;
        const std::size_t wanted = has_l ? r : l;
        if (fork_owner[wanted] && *fork_owner[wanted] != p) edges[p].push_back(*fork_owner[wanted]);
    }
    enum Colour { White, Grey, Black };
    std::vector<Colour> colour(n, White);
    std::function<bool(std::size_t)> visit = [&](std::size_t u) {
        colour[u] = Grey;
        for (std::size_t v : edges[u]) {
            if (colour[v] == Grey) return true;
            if (colour[v] == White && visit(v)) return true;
        }
        colour[u] = Black;
        return false;
    };
    for (std::size_t p = 0; p < n; ++p)
        if (colour[p] == White && visit(p)) return true;
    return false;
}

/// Circular wait restricted to states where everyone holds exactly one fork.
inline bool circular_wait_deadlock(const std::vector<std::optional<std::size_t>>& fork_owner,
                                   const std::vector<bool>& hungry)
{
    const std::size_t n = fork_owner.size();
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t held = 0;
        for (const auto& o : fork_owner) held += o == p;
        if (held != 1) return false;
    }
    return wait_for_cycle(fork_owner, hungry);
}

/// Fork-ownership states reachable from a fresh table when, at every
/// timestep, any subset of philosophers follows the resource-hierarchy rule
/// and the rest wait. Written against the rule itself, not the policy code.
/// Returns every reachable fork-owner vector.
inline std::set<std::vector<int>> hierarchy_reachable_states(std::size_t n, unsigned horizon)
{
    using State = std::vector<int>;  // -1 = free
    auto step = [n](const State& s, unsigned mask) {
        State next = s;
        // who wants which fork
        std::vector<int> want(n, -1);
        for (std::size_t p = 0; p < n; ++p) {
            if (!(mask >> p & 1u)) continue;
            const std::size_t l = p;
            const std::size_t r = (p + 1) % n;
            const std::size_t lo = std::min(l, r);
            const std::size_t hi = std::max(l, r);
            if (s[lo] != static_cast<int>(p) && s[lo] == -1)
                want[p] = static_cast<int>(lo);
            else if (s[lo] == static_cast<int>(p) && s[hi] == -1)
                want[p] = static_cast<int>(hi);
        }
        for (std::size_t p = 0; p < n; ++p) {
            if (want[p] < 0) continue;
            bool beaten = false;
            for (std::size_t q = 0; q < p; ++q) beaten |= want[q] == want[p];
            if (!beaten) next[static_cast<std::size_t>(want[p])] = static_cast<int>(p);
        }
        for (std::size_t p = 0; p < n; ++p) {
            const std::size_t l = p;
            const std::size_t r = (p + 1) % n;
            if (next[l] == static_cast<int>(p) && next[r] == static_cast<int>(p)) next[l] = next[r] = -1;
        }
        return next;
    };

    std::set<State> seen{State(n, -1)};
    std::vector<State> frontier{State(n, -1)};
    for (unsigned t = 0; t < horizon && !frontier.empty(); ++t) {
        std::vector<State> next_frontier;
        for (const auto& s : frontier)
            for (unsigned mask = 0; mask < (1u << n); ++mask) {
                auto ns = step(s, mask);
                if (seen.insert(ns).second) next_frontier.push_back(std::move(ns));
            }
        frontier = std::move(next_frontier);
    }
    return seen;
}

}  // namespace dpbench::oracle
