#pragma once

#include "dpbench/policies.hpp"
#include "dpbench/table.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace dpbench {

// ---- prompts --------------------------------------------------------------

struct PromptBundle {
    std::string system_prompt;
    std::string decision_prompt;
};

/// "Philosopher {pid}".
std::string philosopher_name(PhilosopherId pid);

std::string render_system_prompt(const EpisodeConfig& config, PhilosopherId pid);
/// `comms` selects the neighbour-message variant; absent messages render "None".
std::string render_decision_prompt(const Observation& obs, bool comms);
PromptBundle render_prompts(const EpisodeConfig& config, const Observation& obs);

// ---- responses ------------------------------------------------------------

/// Total: malformed text yields WAIT with parse_ok=false, never an exception.
Decision parse_response(std::string_view text);

/// Trims, maps empty/"None" to absent and cuts to kMaxMessageChars code points.
std::optional<std::string> normalize_message(std::string_view text);

/// Formats a decision the way the response template asks for it.
std::string format_response(const Decision& decision, bool comms);

// ---- endpoint -------------------------------------------------------------

struct LlmEndpointConfig {
    /// Including any path prefix, e.g. "https://api.openai.com/v1".
    std::string base_url;
    std::string model_id;
    double temperature = 0.7;
    /// Name of the environment variable holding the key; the key itself is
    /// never stored here.
    std::string api_key_env_var = "OPENAI_API_KEY";
    unsigned max_retries = 3;
    std::chrono::milliseconds timeout{60000};
    std::chrono::milliseconds initial_backoff{500};
    std::optional<unsigned> max_tokens;

    /// Serializable view (never includes the key).
    nlohmann::json to_json() const;
};

struct CallAccounting {
    std::uint64_t calls = 0;
    std::uint64_t total_tokens = 0;
    double latency_sum_ms = 0.0;
    std::uint64_t parse_failures = 0;

    double average_latency_ms() const { return calls ? latency_sum_ms / static_cast<double>(calls) : 0.0; }
    nlohmann::json to_json() const;
    friend bool operator==(const CallAccounting&, const CallAccounting&) = default;
};

/// Accounting shared by every agent of a run; updates are serialized.
class SharedAccounting {
public:
    void record_attempt(double latency_ms, std::uint64_t tokens);
    void record_parse_failure();
    CallAccounting snapshot() const;

private:
    mutable std::mutex mutex_;
    CallAccounting totals_;
};

struct HttpReply {
    /// 0 when the request never produced a response.
    int status = 0;
    std::string body;
    std::string transport_error;
};

/// One POST of a JSON body to a path under the endpoint's base URL. Must be
/// safe to call from several threads at once.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    virtual HttpReply post_json(const std::string& path, const std::string& body,
                                const std::string& bearer_token) = 0;
};

/// cpp-httplib backed transport; https needs the library built with OpenSSL.
std::unique_ptr<ChatTransport> make_http_transport(const LlmEndpointConfig& config);

struct ChatCompletion {
    std::string content;
    nlohmann::json request;
    nlohmann::json response;
    unsigned attempts = 0;
};

/// Chat-completions client with retry/backoff and accounting.
class LlmClient {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    /// Reads the key from config.api_key_env_var; throws ConfigError if unset.
    LlmClient(LlmEndpointConfig config, std::shared_ptr<SharedAccounting> accounting,
              std::unique_ptr<ChatTransport> transport = nullptr);

    /// Retries transport failures, 429 and 5xx with exponential backoff.
    /// Throws TransportError once max_retries is exhausted or on any other
    /// HTTP error.
    ChatCompletion complete(const std::string& system_prompt, const std::string& user_prompt);

    void set_clock(Clock clock) { clock_ = std::move(clock); }
    void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

    const LlmEndpointConfig& config() const { return config_; }
    SharedAccounting& accounting() { return *accounting_; }

private:
    LlmEndpointConfig config_;
    std::string api_key_;
    std::string path_;
    std::shared_ptr<SharedAccounting> accounting_;
    std::unique_ptr<ChatTransport> transport_;
    Clock clock_;
    Sleeper sleeper_;
};

/// Renders prompts, asks the model, parses the reply.
Decision llm_decide(const Observation& obs, const PolicyContext& ctx, LlmClient& client,
                    nlohmann::json* trace = nullptr);

class LlmPolicy final : public Policy {
public:
    explicit LlmPolicy(std::shared_ptr<LlmClient> client) : client_(std::move(client)) {}

    Decision decide(const Observation& obs, PolicyContext& ctx) override;
    std::string_view name() const override { return "llm"; }
    std::optional<nlohmann::json> take_trace() override;

private:
    std::shared_ptr<LlmClient> client_;
    std::optional<nlohmann::json> trace_;
};

}  // namespace dpbench
