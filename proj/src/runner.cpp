#include "dpbench/runner.hpp"

#include "dpbench/errors.hpp"
#include "dpbench/transcript.hpp"

#include <future>
#include <regex>

namespace dpbench {

namespace {

std::string valid_codes_hint()
{
    std::string s;
    for (const auto& c : standard_condition_codes()) s += (s.empty() ? "" : ", ") + c;
    return s;
}

nlohmann::json header_record(const RunConfig& config, std::size_t episode_index)
{
    std::vector<std::string> seats;
    for (PhilosopherId p = 0; p < config.condition.n; ++p) seats.push_back(config.policy_for(p));
    nlohmann::json h{{"record", "header"},
                     {"format", kTranscriptFormat},
                     {"condition", config.condition.to_string()},
                     {"mode", to_string(config.condition.mode)},
                     {"n", config.condition.n},
                     {"comms", config.condition.comms},
                     {"episode", episode_index},
                     {"seed", config.seed},
                     {"episode_seed", config.episode_seed(episode_index)},
                     {"max_timesteps", config.max_timesteps},
                     {"policies", seats}};
    if (config.endpoint) h["endpoint"] = config.endpoint->to_json();
    return h;
}

CallAccounting difference(const CallAccounting& after, const CallAccounting& before)
{
    return {after.calls - before.calls, after.total_tokens - before.total_tokens,
            after.latency_sum_ms - before.latency_sum_ms, after.parse_failures - before.parse_failures};
}

}  // namespace

std::string ConditionCode::to_string() const
{
    return std::string(mode == Mode::Simultaneous ? "sim" : "seq") + std::to_string(n) + (comms ? "c" : "nc");
}

const std::vector<std::string>& standard_condition_codes()
{
    static const std::vector<std::string> codes{"sim5nc", "sim5c", "seq5nc", "seq5c",
                                                "sim3nc", "sim3c", "seq3nc", "seq3c"};
    return codes;
}

ConditionCode parse_condition(std::string_view code)
{
    static const std::regex kCode(R"(^(sim|seq)([1-9][0-9]{0,3})(c|nc)$)");
    std::smatch m;
    const std::string s(code);
    if (!std::regex_match(s, m, kCode))
        throw ConfigError("unknown condition '" + s + "'; valid codes: " + valid_codes_hint());
    ConditionCode c;
    c.mode = m[1] == "sim" ? Mode::Simultaneous : Mode::Sequential;
    c.n = std::stoul(m[2].str());
    c.comms = m[3] == "c";
    if (c.n < 3) throw ConfigError("condition '" + s + "' needs at least 3 philosophers; valid codes: " + valid_codes_hint());
    return c;
}

std::string_view to_string(Mode mode) { return mode == Mode::Simultaneous ? "simultaneous" : "sequential"; }

std::optional<Mode> mode_from_string(std::string_view name)
{
    if (name == "simultaneous") return Mode::Simultaneous;
    if (name == "sequential") return Mode::Sequential;
    return std::nullopt;
}

const std::string& RunConfig::policy_for(PhilosopherId pid) const
{
    if (policies.size() == 1) return policies.front();
    if (policies.size() != condition.n)
        throw ConfigError("expected 1 or " + std::to_string(condition.n) + " policy names, got "
                          + std::to_string(policies.size()));
    return policies.at(pid);
}

void MessageBus::post(PhilosopherId sender, std::optional<std::string> message, unsigned timestep)
{
    latest_.at(sender) = Slot{std::move(message), timestep};
}

Inbox MessageBus::inbox(PhilosopherId pid) const
{
    const std::size_t n = latest_.size();
    return {latest_.at((pid + n - 1) % n).message, latest_.at((pid + 1) % n).message};
}

std::optional<unsigned> MessageBus::sent_at(PhilosopherId sender) const { return latest_.at(sender).timestep; }

PolicyFactory default_policy_factory(std::shared_ptr<SharedAccounting> accounting)
{
    if (!accounting) accounting = std::make_shared<SharedAccounting>();
    // One client per run, created on first use; it is shared by every seat.
    auto client = std::make_shared<std::shared_ptr<LlmClient>>();
    return [accounting, client](const RunConfig& config) {
        PolicySet set;
        for (PhilosopherId p = 0; p < config.condition.n; ++p) {
            const auto& name = config.policy_for(p);
            if (name == "llm") {
                if (!config.endpoint) throw ConfigError("policy 'llm' needs an endpoint (--base-url, --model)");
                if (!*client) *client = std::make_shared<LlmClient>(*config.endpoint, accounting);
                set.push_back(std::make_unique<LlmPolicy>(*client));
            } else {
                set.push_back(make_scripted_policy(name));
            }
        }
        return set;
    };
}

EpisodeOutcome run_episode(const RunConfig& config, std::size_t episode_index,
                           std::span<const std::unique_ptr<Policy>> policies, const SharedAccounting* accounting)
{
    const auto& cond = config.condition;
    const std::size_t n = cond.n;
    if (policies.size() != n)
        throw ConfigError("expected " + std::to_string(n) + " policies, got " + std::to_string(policies.size()));

    const EpisodeConfig episode = cond.episode_config();
    const std::uint64_t episode_seed = config.episode_seed(episode_index);
    std::vector<PolicyContext> contexts;
    contexts.reserve(n);
    for (PhilosopherId p = 0; p < n; ++p) contexts.emplace_back(episode, episode_seed, p);

    EpisodeOutcome out;
    out.transcript.push_back(header_record(config, episode_index));
    const CallAccounting accounting_before = accounting ? accounting->snapshot() : CallAccounting{};

    TableState table = new_table(n);
    MessageBus bus(n);
    bool deadlocked = false;

    while (table.timestep() < config.max_timesteps) {
        const unsigned t = table.timestep();
        std::vector<PhilosopherId> actors;
        if (cond.mode == Mode::Simultaneous)
            for (PhilosopherId p = 0; p < n; ++p) actors.push_back(p);
        else
            actors.push_back(table.next_sequential());

        // All observations come from the same pre-step snapshot.
        std::vector<Observation> observations;
        for (PhilosopherId p : actors) observations.push_back(observe(table, p, bus.inbox(p), cond.comms));

        std::vector<Decision> decisions(actors.size());
        try {
            if (config.concurrent_decisions && actors.size() > 1) {
                std::vector<std::future<Decision>> pending;
                for (std::size_t i = 0; i < actors.size(); ++i) {
                    pending.push_back(std::async(std::launch::async, [&, i] {
                        return policies[actors[i]]->decide(observations[i], contexts[actors[i]]);
                    }));
                }
                // collected in id order, independent of completion order
                for (std::size_t i = 0; i < actors.size(); ++i) decisions[i] = pending[i].get();
            } else {
                for (std::size_t i = 0; i < actors.size(); ++i)
                    decisions[i] = policies[actors[i]]->decide(observations[i], contexts[actors[i]]);
            }
        } catch (const std::exception& e) {
            throw RunError(episode_index, e.what());
        }

        nlohmann::json decision_records = nlohmann::json::array();
        for (std::size_t i = 0; i < actors.size(); ++i) {
            auto& d = decisions[i];
            if (!d.parse_ok) d.action = Action::Wait;
            d.message = cond.comms && d.message ? normalize_message(*d.message) : std::nullopt;
            auto rec = to_json(d, actors[i]);
            if (auto trace = policies[actors[i]]->take_trace()) rec["llm"] = std::move(*trace);
            decision_records.push_back(std::move(rec));
            if (d.message) out.message_actions.push_back({d.message, d.action});
        }

        StepResult step = [&] {
            if (cond.mode == Mode::Simultaneous) return apply_simultaneous(table, decisions);
            return apply_sequential(table, actors.front(), decisions.front());
        }();

        if (cond.comms)
            for (std::size_t i = 0; i < actors.size(); ++i) bus.post(actors[i], decisions[i].message, t);

        deadlocked = detect_deadlock(step.state);

        nlohmann::json obs_records = nlohmann::json::array();
        for (const auto& o : observations) obs_records.push_back(to_json(o));
        nlohmann::json event_records = nlohmann::json::array();
        for (PhilosopherId p : actors) event_records.push_back(to_json(step.events.philosophers[p], p));
        out.transcript.push_back({{"record", "step"},
                                  {"timestep", t},
                                  {"actors", actors},
                                  {"observations", std::move(obs_records)},
                                  {"decisions", std::move(decision_records)},
                                  {"events", std::move(event_records)},
                                  {"state", to_json(step.state)},
                                  {"deadlock", deadlocked}});
        table = std::move(step.state);
        if (deadlocked) break;
    }

    auto& r = out.result;
    r.deadlocked = deadlocked;
    if (deadlocked) r.deadlock_timestep = table.timestep();
    r.meals_per_philosopher.assign(table.meals().begin(), table.meals().end());
    for (unsigned m : r.meals_per_philosopher) r.meals_total += m;
    r.timesteps_used = table.timestep();

    auto footer = to_json(r);
    if (accounting) footer["accounting"] = difference(accounting->snapshot(), accounting_before).to_json();
    out.transcript.push_back(std::move(footer));
    return out;
}

namespace {

// Drops ep<k>.jsonl files left by an earlier, longer run of the same
// condition so the directory only holds this run's episodes.
void remove_stale_transcripts(const RunConfig& config)
{
    namespace fs = std::filesystem;
    const auto dir = config.output_dir / config.condition.to_string();
    if (!fs::is_directory(dir)) return;
    static const std::regex kEpisodeFile(R"(^ep([0-9]+)\.jsonl$)");
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::smatch m;
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && std::regex_match(name, m, kEpisodeFile) && std::stoull(m[1].str()) >= config.episodes)
            fs::remove(entry.path());
    }
}

}  // namespace

ConditionRun run_condition(const RunConfig& config, const PolicyFactory& factory,
                           std::shared_ptr<SharedAccounting> accounting)
{
    if (config.episodes == 0) throw ConfigError("episodes must be at least 1");
    ConditionRun run;
    std::vector<EpisodeResult> results;
    std::vector<MessageAction> message_actions;
    if (!config.output_dir.empty()) remove_stale_transcripts(config);
    for (std::size_t e = 0; e < config.episodes; ++e) {
        PolicySet policies = factory(config);
        auto outcome = run_episode(config, e, policies, accounting.get());
        if (!config.output_dir.empty()) {
            const auto path = transcript_path(config, e);
            write_transcript(path, outcome.transcript);
            outcome.result.transcript_path = path.string();
        }
        results.push_back(outcome.result);
        message_actions.insert(message_actions.end(), outcome.message_actions.begin(), outcome.message_actions.end());
        run.episodes.push_back(std::move(outcome));
    }
    run.report = aggregate_condition(results, message_actions, config.condition.comms, config.condition.to_string());
    if (accounting) run.accounting = accounting->snapshot();
    return run;
}

ConditionRun run_condition(const RunConfig& config)
{
    bool uses_llm = false;
    for (PhilosopherId p = 0; p < config.condition.n; ++p) uses_llm |= config.policy_for(p) == "llm";
    auto accounting = uses_llm ? std::make_shared<SharedAccounting>() : nullptr;
    return run_condition(config, default_policy_factory(accounting), accounting);
}

std::filesystem::path transcript_path(const RunConfig& config, std::size_t episode_index)
{
    return config.output_dir / config.condition.to_string() / ("ep" + std::to_string(episode_index) + ".jsonl");
}

}  // namespace dpbench
