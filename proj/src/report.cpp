#include "dpbench/report.hpp"

#include "dpbench/errors.hpp"
#include "dpbench/runner.hpp"
#include "dpbench/transcript.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <regex>

namespace dpbench {

namespace {

std::string fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string fixed_or_na(const std::optional<double>& v, int decimals) { return v ? fixed(*v, decimals) : "N/A"; }

nlohmann::json number_or_null(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::string markdown(std::span<const ConditionReport> reports, std::span<const ConditionCost> costs)
{
    std::string out = "| Condition | DL | TP | FR |\n|---|---|---|---|\n";
    for (const auto& r : reports)
        out += "| " + r.condition_code + " | " + fixed(r.deadlock_rate, 3) + " | " + fixed(r.throughput_mean, 3) + " | "
               + fixed(r.fairness_mean, 3) + " |\n";

    out += "\n| Condition | Episodes | DL | TP (std) | FR (std) | TTD | SC | MAC |\n"
           "|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : reports)
        out += "| " + r.condition_code + " | " + std::to_string(r.episodes) + " | " + fixed(r.deadlock_rate, 3) + " | "
               + fixed(r.throughput_mean, 3) + " (" + fixed(r.throughput_std, 3) + ") | " + fixed(r.fairness_mean, 3)
               + " (" + fixed(r.fairness_std, 3) + ") | " + fixed_or_na(r.time_to_deadlock, 1) + " | "
               + fixed(r.starvation_mean, 2) + " | " + fixed_or_na(r.message_action_consistency, 1) + " |\n";

    const bool any_zero = std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.zero_meal_episodes > 0; });
    if (any_zero) {
        out += "\nFairness counts episodes with no meals as 1.0:";
        for (const auto& r : reports)
            if (r.zero_meal_episodes > 0)
                out += " " + r.condition_code + " (" + std::to_string(r.zero_meal_episodes) + ")";
        out += "\n";
    }

    if (!costs.empty()) {
        out += "\n| Condition | Avg Latency (ms) | Total Tokens | LLM Calls | Parse Failures |\n|---|---|---|---|---|\n";
        for (const auto& c : costs)
            out += "| " + c.condition_code + " | " + fixed(c.accounting.average_latency_ms(), 0) + " | "
                   + std::to_string(c.accounting.total_tokens) + " | " + std::to_string(c.accounting.calls) + " | "
                   + std::to_string(c.accounting.parse_failures) + " |\n";
    }
    return out;
}

std::string csv(std::span<const ConditionReport> reports)
{
    std::string out = "condition,episodes,DL,TP,TP_std,FR,FR_std,TTD,SC,MAC,zero_meal_episodes\n";
    for (const auto& r : reports)
        out += r.condition_code + "," + std::to_string(r.episodes) + "," + fixed(r.deadlock_rate, 3) + ","
               + fixed(r.throughput_mean, 3) + "," + fixed(r.throughput_std, 3) + "," + fixed(r.fairness_mean, 3) + ","
               + fixed(r.fairness_std, 3) + "," + fixed_or_na(r.time_to_deadlock, 1) + "," + fixed(r.starvation_mean, 2)
               + "," + fixed_or_na(r.message_action_consistency, 1) + "," + std::to_string(r.zero_meal_episodes) + "\n";
    return out;
}

std::string json_report(std::span<const ConditionReport> reports, std::span<const ConditionCost> costs)
{
    nlohmann::json conditions = nlohmann::json::array();
    for (const auto& r : reports)
        conditions.push_back({{"condition", r.condition_code},
                              {"episodes", r.episodes},
                              {"DL", r.deadlock_rate},
                              {"TP", r.throughput_mean},
                              {"TP_std", r.throughput_std},
                              {"FR", r.fairness_mean},
                              {"FR_std", r.fairness_std},
                              {"TTD", number_or_null(r.time_to_deadlock)},
                              {"SC", r.starvation_mean},
                              {"MAC", number_or_null(r.message_action_consistency)},
                              {"zero_meal_episodes", r.zero_meal_episodes}});
    nlohmann::json cost_rows = nlohmann::json::array();
    for (const auto& c : costs) {
        auto row = c.accounting.to_json();
        row["condition"] = c.condition_code;
        cost_rows.push_back(std::move(row));
    }
    return nlohmann::json{{"conditions", std::move(conditions)}, {"costs", std::move(cost_rows)}}.dump(2) + "\n";
}

std::size_t condition_rank(const std::string& code)
{
    const auto& standard = standard_condition_codes();
    const auto it = std::find(standard.begin(), standard.end(), code);
    return static_cast<std::size_t>(it - standard.begin());
}

}  // namespace

ReportFormat report_format_from_string(std::string_view name)
{
    if (name == "md" || name == "markdown") return ReportFormat::Markdown;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    throw ConfigError("unknown report format '" + std::string(name) + "' (expected md, csv or json)");
}

std::string_view file_extension(ReportFormat format)
{
    switch (format) {
    case ReportFormat::Markdown:
        return "md";
    case ReportFormat::Csv:
        return "csv";
    case ReportFormat::Json:
        return "json";
    }
    return "md";
}

std::string render_report(std::span<const ConditionReport> reports, ReportFormat format,
                          std::span<const ConditionCost> costs)
{
    switch (format) {
    case ReportFormat::Markdown:
        return markdown(reports, costs);
    case ReportFormat::Csv:
        return csv(reports);
    case ReportFormat::Json:
        return json_report(reports, costs);
    }
    return {};
}

DirectoryReport report_from_directory(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());

    std::vector<std::string> conditions;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_directory()) continue;
        const auto name = entry.path().filename().string();
        try {
            parse_condition(name);
        } catch (const ConfigError&) {
            continue;
        }
        conditions.push_back(name);
    }
    std::sort(conditions.begin(), conditions.end(), [](const auto& a, const auto& b) {
        const auto ra = condition_rank(a);
        const auto rb = condition_rank(b);
        return ra != rb ? ra < rb : a < b;
    });

    static const std::regex kEpisodeFile(R"(^ep([0-9]+)\.jsonl$)");
    DirectoryReport out;
    for (const auto& code : conditions) {
        std::map<std::size_t, fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir / code)) {
            std::smatch m;
            const auto name = entry.path().filename().string();
            if (entry.is_regular_file() && std::regex_match(name, m, kEpisodeFile))
                files.emplace(std::stoul(m[1].str()), entry.path());
        }
        if (files.empty()) continue;

        std::vector<EpisodeResult> results;
        std::vector<MessageAction> message_actions;
        std::optional<CallAccounting> cost;
        bool comms = false;
        for (const auto& [index, path] : files) {
            const auto transcript = load_transcript(path);
            comms = transcript.condition().comms;
            auto r = transcript.episode_result();
            r.transcript_path = path.string();
            results.push_back(std::move(r));
            const auto ma = transcript.message_actions();
            message_actions.insert(message_actions.end(), ma.begin(), ma.end());
            if (const auto it = transcript.result.find("accounting"); it != transcript.result.end()) {
                if (!cost) cost = CallAccounting{};
                cost->calls += it->value("calls", std::uint64_t{0});
                cost->total_tokens += it->value("total_tokens", std::uint64_t{0});
                cost->latency_sum_ms += it->value("latency_sum_ms", 0.0);
                cost->parse_failures += it->value("parse_failures", std::uint64_t{0});
            }
        }
        out.reports.push_back(aggregate_condition(results, message_actions, comms, code));
        if (cost) out.costs.push_back({code, *cost});
    }
    return out;
}

}  // namespace dpbench
