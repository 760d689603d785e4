#include "dpbench/metrics.hpp"

#include "dpbench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <regex>
#include <set>
#include <stdexcept>

namespace dpbench {

namespace {

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

// Population standard deviation.
MeanStd mean_std(const std::vector<double>& xs)
{
    MeanStd out;
    if (xs.empty()) return out;
    // Welford: identical inputs give exactly that mean and a std of 0
    double m2 = 0.0;
    double k = 0.0;
    for (double x : xs) {
        k += 1.0;
        const double delta = x - out.mean;
        out.mean += delta / k;
        m2 += delta * (x - out.mean);
    }
    out.std = std::sqrt(m2 / k);
    return out;
}

// Numerator 2*sum(i*m_i) - (N+1)*sum(m) over the ascending sort, in exact
// integer arithmetic so the equality and one-hot extremes come out exact.
struct GiniTerms {
    std::int64_t numerator = 0;
    std::int64_t total = 0;
};

GiniTerms gini_terms(std::span<const unsigned> meals)
{
    std::vector<unsigned> sorted(meals.begin(), meals.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<std::int64_t>(sorted.size());
    std::int64_t weighted = 0;
    std::int64_t total = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        weighted += (i + 1) * static_cast<std::int64_t>(sorted[static_cast<std::size_t>(i)]);
        total += sorted[static_cast<std::size_t>(i)];
    }
    return {2 * weighted - (n + 1) * total, total};
}

double episode_throughput(const EpisodeResult& r)
{
    if (r.timesteps_used == 0) throw std::invalid_argument("episode with zero timesteps");
    return static_cast<double>(r.meals_total) / static_cast<double>(r.timesteps_used);
}

}  // namespace

double deadlock_rate(std::span<const EpisodeResult> results)
{
    if (results.empty()) throw std::invalid_argument("deadlock rate of an empty episode list");
    const auto dl = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.deadlocked; });
    return static_cast<double>(dl) / static_cast<double>(results.size());
}

double throughput(std::span<const EpisodeResult> results)
{
    if (results.empty()) throw std::invalid_argument("throughput of an empty episode list");
    double sum = 0.0;
    for (const auto& r : results) sum += episode_throughput(r);
    return sum / static_cast<double>(results.size());
}

GiniResult gini(std::span<const unsigned> meals)
{
    if (meals.empty()) throw std::invalid_argument("gini of an empty meal vector");
    const auto terms = gini_terms(meals);
    if (terms.total == 0) return {0.0, true};
    const auto n = static_cast<double>(meals.size());
    return {static_cast<double>(terms.numerator) / (n * static_cast<double>(terms.total)), false};
}

FairnessResult fairness(std::span<const unsigned> meals)
{
    if (meals.empty()) throw std::invalid_argument("fairness of an empty meal vector");
    if (meals.size() < 2) throw std::invalid_argument("fairness needs at least two philosophers");
    const auto terms = gini_terms(meals);
    if (terms.total == 0) return {1.0, true};
    // G * N/(N-1) = numerator / ((N-1) * total)
    const auto denom = (static_cast<std::int64_t>(meals.size()) - 1) * terms.total;
    return {1.0 - static_cast<double>(terms.numerator) / static_cast<double>(denom), false};
}

std::optional<double> time_to_deadlock(std::span<const EpisodeResult> results)
{
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : results) {
        if (!r.deadlocked || !r.deadlock_timestep) continue;
        sum += *r.deadlock_timestep;
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

std::size_t starvation_count(const EpisodeResult& result)
{
    return static_cast<std::size_t>(std::count(result.meals_per_philosopher.begin(),
                                               result.meals_per_philosopher.end(), 0u));
}

std::optional<Action> extract_intent(std::string_view message)
{
    using std::regex;
    static const regex kGrabVerb(
        R"(\b(grab|grabs|grabbing|grabbed|take|takes|taking|took|pick|picks|picking|picked|get|gets|getting|got)\b)",
        regex::icase);
    static const regex kLeft(R"(\bleft\b)", regex::icase);
    static const regex kRight(R"(\bright\b)", regex::icase);
    static const regex kWait(R"(\b(wait|waits|waiting)\b|\bhold(ing)?\s+off\b)", regex::icase);
    static const regex kRelease(
        R"(\b(release|releases|releasing|released|drop|drops|dropping|dropped)\b|\b(put|puts|putting)(\s+\w+){0,3}\s+down\b)",
        regex::icase);

    const std::string text(message);
    std::set<Action> intents;
    if (std::regex_search(text, kGrabVerb)) {
        const bool left = std::regex_search(text, kLeft);
        const bool right = std::regex_search(text, kRight);
        if (left) intents.insert(Action::GrabLeft);
        if (right) intents.insert(Action::GrabRight);
    }
    if (std::regex_search(text, kWait)) intents.insert(Action::Wait);
    if (std::regex_search(text, kRelease)) intents.insert(Action::Release);
    if (intents.size() != 1) return std::nullopt;
    return *intents.begin();
}

std::optional<double> message_action_consistency(std::span<const MessageAction> decisions)
{
    std::size_t extractable = 0;
    std::size_t consistent = 0;
    for (const auto& d : decisions) {
        if (!d.message) continue;
        const auto intent = extract_intent(*d.message);
        if (!intent) continue;
        ++extractable;
        if (*intent == d.action) ++consistent;
    }
    if (extractable == 0) return std::nullopt;
    return 100.0 * static_cast<double>(consistent) / static_cast<double>(extractable);
}

ConditionReport aggregate_condition(std::span<const EpisodeResult> results,
                                    std::span<const MessageAction> decisions, bool comms,
                                    std::string condition_code)
{
    if (results.empty()) throw std::invalid_argument("no episodes to aggregate");
    ConditionReport report;
    report.condition_code = std::move(condition_code);
    report.episodes = results.size();
    report.deadlock_rate = deadlock_rate(results);

    std::vector<double> tp;
    std::vector<double> fr;
    double starvation = 0.0;
    for (const auto& r : results) {
        tp.push_back(episode_throughput(r));
        const auto f = fairness(r.meals_per_philosopher);
        fr.push_back(f.value);
        if (f.zero_total) ++report.zero_meal_episodes;
        starvation += static_cast<double>(starvation_count(r));
    }
    const auto tp_stats = mean_std(tp);
    const auto fr_stats = mean_std(fr);
    report.throughput_mean = tp_stats.mean;
    report.throughput_std = tp_stats.std;
    report.fairness_mean = fr_stats.mean;
    report.fairness_std = fr_stats.std;
    report.time_to_deadlock = time_to_deadlock(results);
    report.starvation_mean = starvation / static_cast<double>(results.size());
    if (comms) report.message_action_consistency = message_action_consistency(decisions);
    return report;
}

}  // namespace dpbench
