#pragma once

#include "dpbench/llm_agent.hpp"
#include "dpbench/metrics.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpbench {

enum class ReportFormat { Markdown, Csv, Json };

/// "md", "csv" or "json"; throws ConfigError otherwise.
ReportFormat report_format_from_string(std::string_view name);
std::string_view file_extension(ReportFormat format);

/// Per-condition API cost, when the condition used a model.
struct ConditionCost {
    std::string condition_code;
    CallAccounting accounting;
};

/// Summary (DL/TP/FR) and extended (std, TTD, SC, MAC) columns. Absent
/// values are "N/A" in markdown and CSV, null in JSON. An empty report list
/// renders headers only.
std::string render_report(std::span<const ConditionReport> reports, ReportFormat format,
                          std::span<const ConditionCost> costs = {});

struct DirectoryReport {
    std::vector<ConditionReport> reports;
    std::vector<ConditionCost> costs;
};

/// Aggregates every <dir>/<condition>/ep*.jsonl transcript, conditions in
/// the standard order first.
DirectoryReport report_from_directory(const std::filesystem::path& dir);

}  // namespace dpbench
