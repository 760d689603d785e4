// dpbench command line: run conditions, aggregate transcripts, verify replays.

#include "dpbench/errors.hpp"
#include "dpbench/report.hpp"
#include "dpbench/runner.hpp"
#include "dpbench/transcript.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void write_report(const std::filesystem::path& dir, dpbench::ReportFormat format,
                  const std::vector<dpbench::ConditionReport>& reports, const std::vector<dpbench::ConditionCost>& costs)
{
    const auto text = dpbench::render_report(reports, format, costs);
    std::filesystem::create_directories(dir);
    const auto path = dir / ("report." + std::string(dpbench::file_extension(format)));
    std::ofstream(path, std::ios::binary | std::ios::trunc) << text;
    std::cout << text;
    std::cerr << "report written to " << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dining Philosophers coordination benchmark"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run one or more conditions and write transcripts");
    std::string condition_arg;
    std::string policy_arg = "greedy-left";
    dpbench::RunConfig config;
    std::string out_dir = "results";
    std::string run_format = "md";
    dpbench::LlmEndpointConfig endpoint;
    unsigned timeout_ms = 60000;
    unsigned max_tokens = 0;
    run->add_option("--condition", condition_arg, "Condition code(s), comma separated, or 'all'")->required();
    run->add_option("--policy", policy_arg,
                    "greedy-left|greedy-right|dijkstra|random|polite|llm, or one name per seat, comma separated")
        ->capture_default_str();
    run->add_option("--episodes", config.episodes)->capture_default_str()->check(CLI::PositiveNumber);
    run->add_option("--max-timesteps", config.max_timesteps)->capture_default_str()->check(CLI::PositiveNumber);
    run->add_option("--seed", config.seed)->capture_default_str();
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_option("--format", run_format, "Report format: md|csv|json")->capture_default_str();
    run->add_flag("--concurrent", config.concurrent_decisions, "Query agents of a simultaneous timestep in parallel");
    run->add_option("--base-url", endpoint.base_url, "Chat endpoint base URL, e.g. https://api.openai.com/v1");
    run->add_option("--model", endpoint.model_id, "Model id");
    run->add_option("--temperature", endpoint.temperature)->capture_default_str();
    run->add_option("--api-key-env", endpoint.api_key_env_var, "Environment variable holding the API key")
        ->capture_default_str();
    run->add_option("--max-retries", endpoint.max_retries)->capture_default_str();
    run->add_option("--timeout-ms", timeout_ms)->capture_default_str();
    run->add_option("--max-tokens", max_tokens, "Completion token limit (0 = endpoint default)");

    // report
    auto* report = app.add_subcommand("report", "Aggregate transcripts under a directory");
    std::string in_dir;
    std::string report_format = "md";
    report->add_option("--in", in_dir, "Directory passed to run --out")->required();
    report->add_option("--format", report_format, "md|csv|json")->capture_default_str();

    // replay
    auto* replay = app.add_subcommand("replay", "Re-derive every recorded state of a transcript");
    std::string transcript_file;
    replay->add_option("--transcript", transcript_file)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto format = dpbench::report_format_from_string(run_format);
            std::vector<std::string> codes = condition_arg == "all" ? dpbench::standard_condition_codes()
                                                                    : split_list(condition_arg);
            config.policies = split_list(policy_arg);
            config.output_dir = out_dir;
            if (!endpoint.base_url.empty()) {
                endpoint.timeout = std::chrono::milliseconds(timeout_ms);
                if (max_tokens > 0) endpoint.max_tokens = max_tokens;
                config.endpoint = endpoint;
            }
            // the report covers exactly the conditions of this invocation
            std::vector<dpbench::ConditionReport> reports;
            std::vector<dpbench::ConditionCost> costs;
            for (const auto& code : codes) {
                config.condition = dpbench::parse_condition(code);
                const auto result = dpbench::run_condition(config);
                const auto& r = result.report;
                std::cerr << code << ": DL=" << r.deadlock_rate << " TP=" << r.throughput_mean
                          << " FR=" << r.fairness_mean << "\n";
                reports.push_back(r);
                if (result.accounting) costs.push_back({r.condition_code, *result.accounting});
            }
            write_report(out_dir, format, reports, costs);
        } else if (*report) {
            const auto summary = dpbench::report_from_directory(in_dir);
            write_report(in_dir, dpbench::report_format_from_string(report_format), summary.reports, summary.costs);
        } else if (*replay) {
            const auto transcript = dpbench::load_transcript(transcript_file);
            const auto result = dpbench::replay_transcript(transcript);
            auto ok = result.ok;
            for (const auto& m : result.mismatches) std::cout << "MISMATCH " << m << "\n";
            if (transcript.condition().comms) {
                const auto delay = dpbench::verify_message_delay(transcript);
                for (const auto& v : delay.violations) std::cout << "MESSAGE " << v << "\n";
                ok = ok && delay.ok();
            }
            std::cout << (ok ? "OK" : "FAILED") << " " << result.steps_checked << " steps verified\n";
            return ok ? 0 : 1;
        }
    } catch (const dpbench::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const dpbench::RunError& e) {
        std::cerr << "run aborted: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
