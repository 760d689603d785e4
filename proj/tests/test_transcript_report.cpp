#include "dpbench/errors.hpp"
#include "dpbench/report.hpp"
#include "dpbench/runner.hpp"
#include "dpbench/transcript.hpp"

#include "scripted_talkers.hpp"

#include <doctest.h>

#include <filesystem>

using namespace dpbench;

namespace {

RunConfig config_for(const std::string& code, const std::string& policy, std::size_t episodes = 1)
{
    RunConfig c;
    c.condition = parse_condition(code);
    c.policies = {policy};
    c.episodes = episodes;
    return c;
}

ConditionReport fixture_report()
{
    ConditionReport r;
    r.condition_code = "sim5nc";
    r.episodes = 20;
    r.deadlock_rate = 0.25;
    r.throughput_mean = 0.446;
    r.throughput_std = 0.1;
    r.fairness_mean = 0.576;
    r.fairness_std = 0.05;
    r.starvation_mean = 1.25;
    return r;
}

bool contains(const std::string& haystack, std::string_view needle) { return haystack.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("transcripts replay exactly")
{
    for (const auto& code : standard_condition_codes()) {
        for (const char* policy : {"random", "greedy-left", "dijkstra", "polite"}) {
            INFO(code, " ", policy);
            auto config = config_for(code, policy, 2);
            const auto run = run_condition(config);
            for (const auto& ep : run.episodes) {
                const auto t = parse_transcript(ep.transcript);
                const auto report = replay_transcript(t);
                CHECK(report.ok);
                CHECK(report.steps_checked == ep.result.timesteps_used);
                CHECK(t.episode_result().meals_per_philosopher == ep.result.meals_per_philosopher);
                CHECK(t.condition() == config.condition);
            }
        }
    }
}

TEST_CASE("replay catches tampering")
{
    auto config = config_for("sim5nc", "random");
    const auto out = run_episode(config, 0, [&] {
        PolicySet s;
        for (int p = 0; p < 5; ++p) s.push_back(make_scripted_policy("random"));
        return s;
    }());
    REQUIRE(out.transcript.size() > 4);

    SUBCASE("decision changed")
    {
        auto records = out.transcript;
        auto& d = records[2]["decisions"][0]["action"];
        d = d == "RELEASE" ? "GRAB_LEFT" : "RELEASE";
        CHECK_FALSE(replay_transcript(parse_transcript(records)).ok);
    }
    SUBCASE("meal count changed")
    {
        auto records = out.transcript;
        records.back()["meals"][0] = records.back()["meals"][0].get<unsigned>() + 1;
        CHECK_FALSE(replay_transcript(parse_transcript(records)).ok);
    }
    SUBCASE("observation changed")
    {
        auto records = out.transcript;
        auto& o = records[1]["observations"][2]["left_fork_available"];
        o = !o.get<bool>();
        CHECK_FALSE(replay_transcript(parse_transcript(records)).ok);
    }
    SUBCASE("step dropped")
    {
        auto records = out.transcript;
        records.erase(records.begin() + 2);
        bool rejected = false;
        try {
            rejected = !replay_transcript(parse_transcript(records)).ok;
        } catch (const std::runtime_error&) {
            rejected = true;
        }
        CHECK(rejected);
    }
    SUBCASE("structural damage")
    {
        auto records = out.transcript;
        records.pop_back();
        CHECK_THROWS(parse_transcript(records));
        CHECK_THROWS(parse_transcript({}));
    }
}

TEST_CASE("message delay verification")
{
    auto config = config_for("sim5c", "dijkstra");
    PolicySet talkers;
    for (int p = 0; p < 5; ++p) talkers.push_back(std::make_unique<testing::StampingPolicy>());
    const auto out = run_episode(config, 0, talkers);
    const auto ok = verify_message_delay(parse_transcript(out.transcript));
    CHECK(ok.ok());
    CHECK(ok.messages_checked > 0);

    auto records = out.transcript;
    // show P1 at t=3 what P0 is saying at t=3
    records[4]["observations"][1]["left_message"] = records[4]["decisions"][0]["message"];
    CHECK_FALSE(verify_message_delay(parse_transcript(records)).ok());

    auto seq = config_for("seq5c", "dijkstra");
    PolicySet seq_talkers;
    for (int p = 0; p < 5; ++p) seq_talkers.push_back(std::make_unique<testing::StampingPolicy>());
    const auto seq_out = run_episode(seq, 0, seq_talkers);
    const auto seq_report = verify_message_delay(parse_transcript(seq_out.transcript));
    CHECK(seq_report.ok());
    CHECK(seq_report.messages_checked > 0);
    CHECK(replay_transcript(parse_transcript(seq_out.transcript)).ok);
}

TEST_CASE("file round trip")
{
    auto config = config_for("seq3c", "random");
    config.output_dir = std::filesystem::temp_directory_path() / "dpbench_unit_roundtrip";
    std::filesystem::remove_all(config.output_dir);
    const auto run = run_condition(config);
    const auto loaded = load_transcript(transcript_path(config, 0));
    CHECK(replay_transcript(loaded).ok);
    CHECK(loaded.steps.size() == run.episodes[0].transcript.size() - 2);
    std::filesystem::remove_all(config.output_dir);
    CHECK_THROWS(load_transcript(config.output_dir / "missing.jsonl"));
}

TEST_CASE("markdown report")
{
    const std::vector<ConditionReport> reports{fixture_report()};
    const auto md = render_report(reports, ReportFormat::Markdown);
    CHECK(contains(md, "| Condition | DL | TP | FR |"));
    CHECK(contains(md, "| sim5nc | 0.250 | 0.446 | 0.576 |"));
    CHECK(contains(md, "| sim5nc | 20 | 0.250 | 0.446 (0.100) | 0.576 (0.050) | N/A | 1.25 | N/A |"));
    CHECK_FALSE(contains(md, "Avg Latency"));

    const auto empty = render_report(std::span<const ConditionReport>{}, ReportFormat::Markdown);
    CHECK(contains(empty, "| Condition | DL | TP | FR |"));
    CHECK_FALSE(contains(empty, "sim"));

    auto with_mac = fixture_report();
    with_mac.condition_code = "sim5c";
    with_mac.message_action_consistency = 70.0;
    with_mac.time_to_deadlock = 3.5;
    with_mac.zero_meal_episodes = 2;
    const std::vector<ConditionReport> two{fixture_report(), with_mac};
    const std::vector<ConditionCost> costs{{"sim5c", CallAccounting{10, 1234, 250.0, 1}}};
    const auto full = render_report(two, ReportFormat::Markdown, costs);
    CHECK(contains(full, "| 3.5 | 1.25 | 70.0 |"));
    CHECK(contains(full, "sim5c (2)"));
    CHECK(contains(full, "| sim5c | 25 | 1234 | 10 | 1 |"));
}

TEST_CASE("csv and json reports")
{
    const std::vector<ConditionReport> reports{fixture_report()};
    const auto csv = render_report(reports, ReportFormat::Csv);
    CHECK(csv == "condition,episodes,DL,TP,TP_std,FR,FR_std,TTD,SC,MAC,zero_meal_episodes\n"
                 "sim5nc,20,0.250,0.446,0.100,0.576,0.050,N/A,1.25,N/A,0\n");

    const auto j = nlohmann::json::parse(render_report(reports, ReportFormat::Json));
    CHECK(j["conditions"][0]["condition"] == "sim5nc");
    CHECK(j["conditions"][0]["DL"] == 0.25);
    CHECK(j["conditions"][0]["TTD"].is_null());
    CHECK(j["conditions"][0]["MAC"].is_null());
    CHECK(j["costs"].empty());

    CHECK(report_format_from_string("md") == ReportFormat::Markdown);
    CHECK(report_format_from_string("json") == ReportFormat::Json);
    CHECK_THROWS_AS(report_format_from_string("xml"), ConfigError);
}

TEST_CASE("report from a results directory matches the in-memory run")
{
    const auto dir = std::filesystem::temp_directory_path() / "dpbench_unit_report";
    std::filesystem::remove_all(dir);
    std::vector<ConditionReport> expected;
    for (const char* code : {"seq3nc", "sim5c", "sim5nc"}) {
        auto config = config_for(code, "random", 3);
        config.output_dir = dir;
        expected.push_back(run_condition(config).report);
    }
    std::filesystem::create_directories(dir / "notes");

    const auto loaded = report_from_directory(dir);
    REQUIRE(loaded.reports.size() == 3);
    CHECK(loaded.reports[0].condition_code == "sim5nc");
    CHECK(loaded.reports[1].condition_code == "sim5c");
    CHECK(loaded.reports[2].condition_code == "seq3nc");
    CHECK(loaded.costs.empty());
    for (const auto& r : loaded.reports) {
        const auto it = std::find_if(expected.begin(), expected.end(), [&](const auto& e) { return e.condition_code == r.condition_code; });
        REQUIRE(it != expected.end());
        CHECK(r.deadlock_rate == it->deadlock_rate);
        CHECK(r.throughput_mean == doctest::Approx(it->throughput_mean));
        CHECK(r.fairness_mean == doctest::Approx(it->fairness_mean));
        CHECK(r.message_action_consistency == it->message_action_consistency);
    }
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(report_from_directory(dir), ConfigError);
}
