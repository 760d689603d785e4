#include "dpbench/llm_agent.hpp"

#include "dpbench/errors.hpp"

#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>

namespace dpbench {

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path_prefix;
};

ParsedUrl split_url(const std::string& url)
{
    static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(url, m, kUrl)) throw ConfigError("invalid endpoint base URL '" + url + "'");
    std::string prefix = m[2].matched ? m[2].str() : "";
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {m[1].str(), prefix};
}

class HttplibTransport final : public ChatTransport {
public:
    HttplibTransport(std::string origin, std::chrono::milliseconds timeout)
        : origin_(std::move(origin)), timeout_(timeout)
    {
    }

    HttpReply post_json(const std::string& path, const std::string& body, const std::string& bearer_token) override
    {
        // A client per request: httplib::Client is not meant for concurrent use.
        httplib::Client client(origin_);
        client.set_connection_timeout(timeout_);
        client.set_read_timeout(timeout_);
        client.set_write_timeout(timeout_);
        httplib::Headers headers;
        if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);
        auto res = client.Post(path, headers, body, "application/json");
        HttpReply reply;
        if (!res) {
            reply.transport_error = httplib::to_string(res.error());
            return reply;
        }
        reply.status = res->status;
        reply.body = res->body;
        return reply;
    }

private:
    std::string origin_;
    std::chrono::milliseconds timeout_;
};

bool retryable(const HttpReply& r) { return r.status == 0 || r.status == 429 || r.status >= 500; }

}  // namespace

nlohmann::json LlmEndpointConfig::to_json() const
{
    nlohmann::json j{{"base_url", base_url},
                     {"model", model_id},
                     {"temperature", temperature},
                     {"api_key_env", api_key_env_var},
                     {"max_retries", max_retries},
                     {"timeout_ms", timeout.count()}};
    if (max_tokens) j["max_tokens"] = *max_tokens;
    return j;
}

nlohmann::json CallAccounting::to_json() const
{
    return {{"calls", calls},
            {"total_tokens", total_tokens},
            {"latency_sum_ms", latency_sum_ms},
            {"avg_latency_ms", average_latency_ms()},
            {"parse_failures", parse_failures}};
}

void SharedAccounting::record_attempt(double latency_ms, std::uint64_t tokens)
{
    std::lock_guard lock(mutex_);
    ++totals_.calls;
    totals_.total_tokens += tokens;
    totals_.latency_sum_ms += latency_ms;
}

void SharedAccounting::record_parse_failure()
{
    std::lock_guard lock(mutex_);
    ++totals_.parse_failures;
}

CallAccounting SharedAccounting::snapshot() const
{
    std::lock_guard lock(mutex_);
    return totals_;
}

std::unique_ptr<ChatTransport> make_http_transport(const LlmEndpointConfig& config)
{
    return std::make_unique<HttplibTransport>(split_url(config.base_url).origin, config.timeout);
}

LlmClient::LlmClient(LlmEndpointConfig config, std::shared_ptr<SharedAccounting> accounting,
                     std::unique_ptr<ChatTransport> transport)
    : config_(std::move(config)), accounting_(std::move(accounting)), transport_(std::move(transport)),
      clock_([] { return std::chrono::steady_clock::now(); }),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })
{
    if (!accounting_) accounting_ = std::make_shared<SharedAccounting>();
    const auto url = split_url(config_.base_url);
    path_ = url.path_prefix + "/chat/completions";
    if (!transport_) transport_ = make_http_transport(config_);
    if (!config_.api_key_env_var.empty()) {
        const char* key = std::getenv(config_.api_key_env_var.c_str());
        if (key == nullptr || *key == '\0')
            throw ConfigError("environment variable " + config_.api_key_env_var + " is not set");
        api_key_ = key;
    }
}

ChatCompletion LlmClient::complete(const std::string& system_prompt, const std::string& user_prompt)
{
    ChatCompletion out;
    out.request = {{"model", config_.model_id},
                   {"temperature", config_.temperature},
                   {"messages",
                    nlohmann::json::array({{{"role", "system"}, {"content", system_prompt}},
                                           {{"role", "user"}, {"content", user_prompt}}})}};
    if (config_.max_tokens) out.request["max_tokens"] = *config_.max_tokens;
    const std::string body = out.request.dump();

    std::string last_error;
    auto backoff = config_.initial_backoff;
    for (unsigned attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            sleeper_(backoff);
            backoff *= 2;
        }
        const auto start = clock_();
        const HttpReply reply = transport_->post_json(path_, body, api_key_);
        const double latency_ms = std::chrono::duration<double, std::milli>(clock_() - start).count();
        ++out.attempts;

        if (reply.status == 200) {
            auto parsed = nlohmann::json::parse(reply.body, nullptr, false);
            std::uint64_t tokens = 0;
            if (parsed.is_object() && parsed.contains("usage") && parsed["usage"].is_object()) {
                const auto& usage = parsed["usage"];
                auto count = [&](const char* key) -> std::uint64_t {
                    const auto it = usage.find(key);
                    return it != usage.end() && it->is_number_unsigned() ? it->get<std::uint64_t>() : 0;
                };
                tokens = usage.contains("total_tokens") ? count("total_tokens")
                                                        : count("prompt_tokens") + count("completion_tokens");
            }
            accounting_->record_attempt(latency_ms, tokens);
            out.response = parsed.is_discarded() ? nlohmann::json(reply.body) : parsed;
            // A body without choices[0].message.content is a malformed
            // completion, handled downstream as a parse failure.
            try {
                out.content = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception&) {
                out.content.clear();
            }
            return out;
        }

        accounting_->record_attempt(latency_ms, 0);
        last_error = reply.status == 0 ? "transport error: " + reply.transport_error
                                       : "HTTP " + std::to_string(reply.status);
        if (!retryable(reply)) throw TransportError("chat endpoint returned " + last_error);
    }
    throw TransportError("chat endpoint failed after " + std::to_string(out.attempts) + " attempts: " + last_error);
}

Decision llm_decide(const Observation& obs, const PolicyContext& ctx, LlmClient& client, nlohmann::json* trace)
{
    const auto prompts = render_prompts(ctx.episode, obs);
    auto completion = client.complete(prompts.system_prompt, prompts.decision_prompt);
    Decision d = parse_response(completion.content);
    if (!d.parse_ok) client.accounting().record_parse_failure();
    if (!ctx.episode.comms) d.message.reset();
    if (trace) {
        *trace = {{"request", std::move(completion.request)},
                  {"response", std::move(completion.response)},
                  {"attempts", completion.attempts}};
    }
    return d;
}

Decision LlmPolicy::decide(const Observation& obs, PolicyContext& ctx)
{
    nlohmann::json trace;
    Decision d = llm_decide(obs, ctx, *client_, &trace);
    trace_ = std::move(trace);
    return d;
}

std::optional<nlohmann::json> LlmPolicy::take_trace()
{
    auto t = std::move(trace_);
    trace_.reset();
    return t;
}

}  // namespace dpbench
