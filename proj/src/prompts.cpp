#include "dpbench/llm_agent.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

namespace dpbench {

namespace {

constexpr std::string_view kProblemSections =
    "THE DINING PHILOSOPHERS PROBLEM:\n"
    "- You and your fellow philosophers share forks placed between each pair of adjacent philosophers\n"
    "- To eat, you must hold BOTH your left fork AND your right fork simultaneously\n"
    "- Each fork can only be held by one philosopher at a time\n"
    "- After eating, you automatically release both forks\n"
    "\n"
    "YOUR GOAL:\n"
    "- Coordinate with others to avoid DEADLOCK (where everyone holds one fork and waits forever)\n"
    "- Maximize total meals eaten by the group\n"
    "- Ensure fair distribution of meals among all philosophers\n"
    "\n"
    "AVAILABLE ACTIONS:\n"
    "- GRAB_LEFT: Pick up the fork on your left (if available)\n"
    "- GRAB_RIGHT: Pick up the fork on your right (if available)\n"
    "- RELEASE: Release any forks you are holding\n"
    "- WAIT: Do nothing this turn\n"
    "\n";

constexpr std::string_view kCommunicationSection =
    "COMMUNICATION:\n"
    "- You can send a message to your neighbors each turn\n"
    "- Use messages to coordinate and avoid conflicts\n"
    "- Be concise and clear in your communication\n"
    "\n";

constexpr std::string_view kResponseFormat =
    "RESPONSE FORMAT:\n"
    "THINKING: [Brief reasoning about the current situation]\n"
    "ACTION: [One of: GRAB_LEFT, GRAB_RIGHT, RELEASE, WAIT]";

constexpr std::string_view kResponseFormatComms =
    "RESPONSE FORMAT:\n"
    "THINKING: [Brief reasoning about the current situation]\n"
    "MESSAGE: [Short message to your neighbors, or \"None\"]\n"
    "ACTION: [One of: GRAB_LEFT, GRAB_RIGHT, RELEASE, WAIT]";

std::string holding_status(const Observation& obs)
{
    if (obs.holds_left && obs.holds_right) return "left and right forks";
    if (obs.holds_left) return "left fork";
    if (obs.holds_right) return "right fork";
    return "nothing";
}

std::string fork_status(bool held, bool available)
{
    if (held) return "held by you";
    return available ? "available" : "unavailable";
}

std::string_view trim(std::string_view s)
{
    const auto* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

// Cuts to at most `limit` UTF-8 code points.
std::string truncate_utf8(std::string_view s, std::size_t limit)
{
    std::size_t points = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto c = static_cast<unsigned char>(s[i]);
        if ((c & 0xC0) != 0x80) {
            if (points == limit) return std::string(s.substr(0, i));
            ++points;
        }
    }
    return std::string(s);
}

std::string strip_wrapping(std::string_view v)
{
    v = trim(v);
    while (v.size() >= 2) {
        const char a = v.front();
        const char b = v.back();
        if ((a == '"' && b == '"') || (a == '\'' && b == '\'') || (a == '[' && b == ']') || (a == '(' && b == ')')
            || (a == '*' && b == '*') || (a == '`' && b == '`'))
            v = trim(v.substr(1, v.size() - 2));
        else
            break;
    }
    return std::string(v);
}

std::optional<Action> read_action(std::string_view value)
{
    std::string v = strip_wrapping(value);
    // keep the leading run of identifier-ish characters: "GRAB_LEFT." or "wait (nothing free)"
    std::string token;
    for (char c : v) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ' ')
            token += c;
        else
            break;
    }
    auto normalize = [](std::string s) {
        for (auto& c : s) {
            if (c == ' ' || c == '-') c = '_';
            c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
        return s;
    };
    std::string whole = normalize(std::string(trim(token)));
    if (auto a = action_from_string(whole)) return a;
    const auto first_space = std::string(trim(token)).find(' ');
    if (first_space != std::string::npos) {
        std::string first = normalize(std::string(trim(token)).substr(0, first_space));
        if (auto a = action_from_string(first)) return a;
    }
    return std::nullopt;
}

enum class Field { Thinking, Message, Action };

struct FieldLine {
    Field field;
    std::string value;
};

std::optional<FieldLine> match_field(const std::string& line)
{
    static const std::regex kField(R"(^[\s*_#>`\-]*(THINKING|MESSAGE|ACTION)\s*[*_]*\s*:\s*[*_]*(.*)$)",
                                   std::regex::icase);
    std::smatch m;
    if (!std::regex_match(line, m, kField)) return std::nullopt;
    std::string key = m[1].str();
    for (auto& c : key) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    const Field f = key == "THINKING" ? Field::Thinking : key == "MESSAGE" ? Field::Message : Field::Action;
    return FieldLine{f, m[2].str()};
}

}  // namespace

std::string philosopher_name(PhilosopherId pid) { return "Philosopher " + std::to_string(pid); }

std::string render_system_prompt(const EpisodeConfig& config, PhilosopherId pid)
{
    std::ostringstream os;
    os << "You are " << philosopher_name(pid) << ", one of " << config.n
       << " philosophers seated at a circular dining table.\n\n"
       << kProblemSections;
    if (config.comms)
        os << kCommunicationSection << kResponseFormatComms;
    else
        os << kResponseFormat;
    return os.str();
}

std::string render_decision_prompt(const Observation& obs, bool comms)
{
    std::ostringstream os;
    os << "You are " << philosopher_name(obs.self_id) << ".\n\n"
       << "CURRENT STATE:\n"
       << "- Your state: " << to_string(obs.status) << "\n"
       << "- Meals eaten: " << obs.meals_eaten << "\n"
       << "- Currently holding: " << holding_status(obs) << "\n\n"
       << "FORK STATUS:\n"
       << "- Left fork: " << fork_status(obs.holds_left, obs.left_fork_available) << "\n"
       << "- Right fork: " << fork_status(obs.holds_right, obs.right_fork_available) << "\n\n";
    if (comms) {
        os << "NEIGHBOR MESSAGES:\n"
           << "- From left neighbor: " << obs.left_message.value_or("None") << "\n"
           << "- From right neighbor: " << obs.right_message.value_or("None") << "\n\n"
           << "What is your action? You may also send a message to coordinate.\n\n"
           << "THINKING: [Your reasoning]\n"
           << "MESSAGE: [Short message to neighbors, or \"None\"]\n"
           << "ACTION: [GRAB_LEFT / GRAB_RIGHT / RELEASE / WAIT]";
    } else {
        os << "What is your action?\n\n"
           << "THINKING: [Your reasoning]\n"
           << "ACTION: [GRAB_LEFT / GRAB_RIGHT / RELEASE / WAIT]";
    }
    return os.str();
}

PromptBundle render_prompts(const EpisodeConfig& config, const Observation& obs)
{
    return {render_system_prompt(config, obs.self_id), render_decision_prompt(obs, config.comms)};
}

Decision parse_response(std::string_view text)
{
    Decision d;
    d.raw = std::string(text);

    std::vector<std::string> lines;
    {
        std::string line;
        std::istringstream is{std::string(text)};
        while (std::getline(is, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(std::move(line));
        }
    }

    std::optional<std::string> action_value;
    std::optional<std::string> message_value;
    std::optional<std::string> thinking;
    bool in_thinking = false;
    for (const auto& line : lines) {
        const auto field = match_field(line);
        if (!field) {
            if (in_thinking) *thinking += "\n" + line;
            continue;
        }
        in_thinking = false;
        switch (field->field) {
        case Field::Thinking:
            // a later THINKING block replaces an earlier one, like the other fields
            thinking = std::string(trim(field->value));
            in_thinking = true;
            break;
        case Field::Message:
            message_value = field->value;
            break;
        case Field::Action:
            action_value = field->value;
            break;
        }
    }
    if (thinking) d.thinking = std::string(trim(*thinking));

    if (message_value) d.message = normalize_message(*message_value);

    const auto action = action_value ? read_action(*action_value) : std::nullopt;
    if (action) {
        d.action = *action;
        d.parse_ok = true;
    } else {
        d.action = Action::Wait;
        d.parse_ok = false;
    }
    return d;
}

std::optional<std::string> normalize_message(std::string_view text)
{
    std::string m = strip_wrapping(text);
    std::string lowered = m;
    for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (m.empty() || lowered == "none") return std::nullopt;
    return truncate_utf8(m, kMaxMessageChars);
}

std::string format_response(const Decision& decision, bool comms)
{
    std::string out = "THINKING: " + decision.thinking + "\n";
    if (comms) out += "MESSAGE: " + decision.message.value_or("None") + "\n";
    out += "ACTION: " + std::string(to_string(decision.action));
    return out;
}

}  // namespace dpbench
