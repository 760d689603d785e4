#include "dpbench/transcript.hpp"

#include "dpbench/errors.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dpbench {

using nlohmann::json;

namespace {

json optional_text(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> text_or_null(const json& j, const char* key)
{
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
}

Action action_at(const json& j, const char* key)
{
    const auto name = j.at(key).get<std::string>();
    const auto a = action_from_string(name);
    if (!a) throw std::runtime_error("unknown action '" + name + "'");
    return *a;
}

std::string describe(const json& expected, const json& actual)
{
    return "expected " + expected.dump() + ", recorded " + actual.dump();
}

}  // namespace

json to_json(const Observation& obs)
{
    return {{"pid", obs.self_id},
            {"status", to_string(obs.status)},
            {"meals_eaten", obs.meals_eaten},
            {"holds_left", obs.holds_left},
            {"holds_right", obs.holds_right},
            {"left_fork_available", obs.left_fork_available},
            {"right_fork_available", obs.right_fork_available},
            {"left_message", optional_text(obs.left_message)},
            {"right_message", optional_text(obs.right_message)}};
}

json to_json(const Decision& decision, PhilosopherId pid)
{
    json j{{"pid", pid},
           {"action", to_string(decision.action)},
           {"message", optional_text(decision.message)},
           {"thinking", decision.thinking},
           {"parse_ok", decision.parse_ok}};
    if (!decision.raw.empty()) j["raw"] = decision.raw;
    return j;
}

json to_json(const PhilosopherEvent& event, PhilosopherId pid)
{
    return {{"pid", pid},
            {"action", event.action ? json(to_string(*event.action)) : json(nullptr)},
            {"grab", to_string(event.grab)},
            {"released", event.released},
            {"ate", event.ate},
            {"auto_released", event.auto_released}};
}

json to_json(const TableState& table)
{
    json owners = json::array();
    for (const auto& o : table.fork_owners()) owners.push_back(o ? json(*o) : json(nullptr));
    json statuses = json::array();
    for (auto s : table.statuses()) statuses.push_back(to_string(s));
    return {{"timestep", table.timestep()},
            {"fork_owner", std::move(owners)},
            {"status", std::move(statuses)},
            {"meals", std::vector<unsigned>(table.meals().begin(), table.meals().end())}};
}

json to_json(const EpisodeResult& r)
{
    return {{"record", "result"},
            {"deadlocked", r.deadlocked},
            {"deadlock_timestep", r.deadlock_timestep ? json(*r.deadlock_timestep) : json(nullptr)},
            {"meals", r.meals_per_philosopher},
            {"meals_total", r.meals_total},
            {"timesteps_used", r.timesteps_used}};
}

Observation observation_from_json(const json& j)
{
    Observation o;
    o.self_id = j.at("pid").get<PhilosopherId>();
    const auto status = status_from_string(j.at("status").get<std::string>());
    if (!status) throw std::runtime_error("unknown status in observation");
    o.status = *status;
    o.meals_eaten = j.at("meals_eaten").get<unsigned>();
    o.holds_left = j.at("holds_left").get<bool>();
    o.holds_right = j.at("holds_right").get<bool>();
    o.left_fork_available = j.at("left_fork_available").get<bool>();
    o.right_fork_available = j.at("right_fork_available").get<bool>();
    o.left_message = text_or_null(j, "left_message");
    o.right_message = text_or_null(j, "right_message");
    return o;
}

Decision decision_from_json(const json& j)
{
    Decision d;
    d.action = action_at(j, "action");
    d.message = text_or_null(j, "message");
    d.thinking = j.value("thinking", std::string{});
    d.parse_ok = j.value("parse_ok", true);
    d.raw = j.value("raw", std::string{});
    return d;
}

PhilosopherEvent event_from_json(const json& j)
{
    PhilosopherEvent e;
    if (!j.at("action").is_null()) e.action = action_at(j, "action");
    const auto grab = grab_outcome_from_string(j.at("grab").get<std::string>());
    if (!grab) throw std::runtime_error("unknown grab outcome");
    e.grab = *grab;
    e.released = j.at("released").get<std::vector<ForkId>>();
    e.ate = j.at("ate").get<bool>();
    e.auto_released = j.at("auto_released").get<std::vector<ForkId>>();
    return e;
}

ConditionCode Transcript::condition() const
{
    ConditionCode c;
    const auto mode = mode_from_string(header.at("mode").get<std::string>());
    if (!mode) throw std::runtime_error("unknown mode in transcript header");
    c.mode = *mode;
    c.n = header.at("n").get<std::size_t>();
    c.comms = header.at("comms").get<bool>();
    return c;
}

EpisodeResult Transcript::episode_result() const
{
    EpisodeResult r;
    r.deadlocked = result.at("deadlocked").get<bool>();
    if (!result.at("deadlock_timestep").is_null()) r.deadlock_timestep = result.at("deadlock_timestep").get<unsigned>();
    r.meals_per_philosopher = result.at("meals").get<std::vector<unsigned>>();
    r.meals_total = result.at("meals_total").get<unsigned>();
    r.timesteps_used = result.at("timesteps_used").get<unsigned>();
    return r;
}

std::vector<MessageAction> Transcript::message_actions() const
{
    std::vector<MessageAction> out;
    for (const auto& step : steps)
        for (const auto& d : step.at("decisions")) {
            auto message = text_or_null(d, "message");
            if (message) out.push_back({std::move(message), action_at(d, "action")});
        }
    return out;
}

Transcript parse_transcript(const std::vector<json>& records)
{
    Transcript t;
    bool have_header = false;
    bool have_result = false;
    for (const auto& r : records) {
        const auto kind = r.value("record", std::string{});
        if (kind == "header") {
            if (have_header) throw std::runtime_error("transcript has two header records");
            t.header = r;
            have_header = true;
        } else if (kind == "step") {
            if (!have_header || have_result) throw std::runtime_error("step record outside header/result");
            t.steps.push_back(r);
        } else if (kind == "result") {
            if (!have_header || have_result) throw std::runtime_error("misplaced result record");
            t.result = r;
            have_result = true;
        } else {
            throw std::runtime_error("unknown transcript record '" + kind + "'");
        }
    }
    if (!have_header || !have_result) throw std::runtime_error("transcript lacks a header or result record");
    return t;
}

Transcript load_transcript(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open transcript " + path.string());
    std::vector<json> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            records.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return parse_transcript(records);
}

std::string serialize_records(const std::vector<json>& records)
{
    std::string out;
    for (const auto& r : records) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

void write_transcript(const std::filesystem::path& path, const std::vector<json>& records)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write transcript " + path.string());
    out << serialize_records(records);
}

ReplayReport replay_transcript(const Transcript& transcript)
{
    ReplayReport report;
    auto fail = [&](std::size_t step, const std::string& what) {
        report.ok = false;
        report.mismatches.push_back("step " + std::to_string(step) + ": " + what);
    };

    ConditionCode cond;
    try {
        cond = transcript.condition();
        TableState table = new_table(cond.n);
        MessageBus bus(cond.n);
        bool deadlocked = false;

        for (std::size_t i = 0; i < transcript.steps.size(); ++i) {
            const auto& step = transcript.steps[i];
            const unsigned t = table.timestep();
            if (deadlocked) fail(i, "step recorded after deadlock");
            if (step.at("timestep").get<unsigned>() != t)
                fail(i, "timestep " + describe(t, step.at("timestep")));

            std::vector<PhilosopherId> actors;
            if (cond.mode == Mode::Simultaneous)
                for (PhilosopherId p = 0; p < cond.n; ++p) actors.push_back(p);
            else
                actors.push_back(table.next_sequential());
            if (step.at("actors") != json(actors)) {
                fail(i, "actors " + describe(actors, step.at("actors")));
                break;
            }

            const auto& obs = step.at("observations");
            const auto& decs = step.at("decisions");
            if (obs.size() != actors.size() || decs.size() != actors.size()) {
                fail(i, "observation/decision count does not match actors");
                break;
            }
            std::vector<Decision> decisions;
            for (std::size_t k = 0; k < actors.size(); ++k) {
                const auto expected = to_json(observe(table, actors[k], bus.inbox(actors[k]), cond.comms));
                if (expected != obs[k]) fail(i, "observation of P" + std::to_string(actors[k]) + " " + describe(expected, obs[k]));
                if (decs[k].at("pid").get<PhilosopherId>() != actors[k]) fail(i, "decision pid mismatch");
                decisions.push_back(decision_from_json(decs[k]));
            }

            StepResult next = cond.mode == Mode::Simultaneous ? apply_simultaneous(table, decisions)
                                                              : apply_sequential(table, actors.front(), decisions.front());
            json events = json::array();
            for (PhilosopherId p : actors) events.push_back(to_json(next.events.philosophers[p], p));
            if (events != step.at("events")) fail(i, "events " + describe(events, step.at("events")));
            const auto state = to_json(next.state);
            if (state != step.at("state")) fail(i, "state " + describe(state, step.at("state")));
            deadlocked = detect_deadlock(next.state);
            if (json(deadlocked) != step.at("deadlock")) fail(i, "deadlock flag " + describe(deadlocked, step.at("deadlock")));

            if (cond.comms)
                for (std::size_t k = 0; k < actors.size(); ++k) bus.post(actors[k], decisions[k].message, t);
            table = std::move(next.state);
            ++report.steps_checked;
        }

        EpisodeResult expected;
        expected.deadlocked = deadlocked;
        if (deadlocked) expected.deadlock_timestep = table.timestep();
        expected.meals_per_philosopher.assign(table.meals().begin(), table.meals().end());
        for (unsigned m : expected.meals_per_philosopher) expected.meals_total += m;
        expected.timesteps_used = table.timestep();
        auto recorded = transcript.result;
        recorded.erase("accounting");
        if (to_json(expected) != recorded) fail(transcript.steps.size(), "result " + describe(to_json(expected), recorded));
        const auto horizon = transcript.header.at("max_timesteps").get<unsigned>();
        if (!deadlocked && table.timestep() != horizon)
            fail(transcript.steps.size(), "episode ended before deadlock or the horizon");
    } catch (const std::exception& e) {
        report.ok = false;
        report.mismatches.push_back(std::string("malformed transcript: ") + e.what());
    }
    return report;
}

MessageDelayReport verify_message_delay(const Transcript& transcript)
{
    MessageDelayReport report;
    const auto cond = transcript.condition();
    const std::size_t n = cond.n;

    struct Sent {
        unsigned timestep;
        std::optional<std::string> message;
    };
    std::map<PhilosopherId, Sent> latest;

    for (const auto& step : transcript.steps) {
        const auto t = step.at("timestep").get<unsigned>();
        for (const auto& o : step.at("observations")) {
            const auto pid = o.at("pid").get<PhilosopherId>();
            const std::pair<PhilosopherId, const char*> slots[] = {{(pid + n - 1) % n, "left_message"},
                                                                   {(pid + 1) % n, "right_message"}};
            for (const auto& [sender, key] : slots) {
                const auto seen = text_or_null(o, key);
                if (!cond.comms) {
                    if (seen) report.violations.push_back("t=" + std::to_string(t) + " P" + std::to_string(pid)
                                                          + " received a message with communication disabled");
                    continue;
                }
                const auto it = latest.find(sender);
                const std::optional<std::string> expected =
                    it == latest.end() ? std::nullopt : it->second.message;
                if (seen) ++report.messages_checked;
                if (seen != expected) {
                    report.violations.push_back("t=" + std::to_string(t) + " P" + std::to_string(pid) + " " + key
                                                + " does not match the sender's latest message");
                    continue;
                }
                if (!seen) continue;
                const unsigned sent = it->second.timestep;
                const bool timely = cond.mode == Mode::Simultaneous ? sent + 1 == t : sent < t;
                if (!timely)
                    report.violations.push_back("t=" + std::to_string(t) + " P" + std::to_string(pid) + " saw a message sent at t="
                                                + std::to_string(sent));
            }
        }
        for (const auto& d : step.at("decisions"))
            latest[d.at("pid").get<PhilosopherId>()] = Sent{t, text_or_null(d, "message")};
    }
    return report;
}

}  // namespace dpbench
