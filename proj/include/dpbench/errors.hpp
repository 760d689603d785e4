#pragma once

#include <stdexcept>
#include <string>

namespace dpbench {

/// Invalid table size, condition code, policy name or run setting.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The chat endpoint could not produce a completion (retries exhausted or a
/// non-retryable HTTP status). Never a coordination outcome.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An episode aborted for a reason other than deadlock or the horizon.
class RunError : public std::runtime_error {
public:
    RunError(std::size_t episode, const std::string& what)
        : std::runtime_error("episode " + std::to_string(episode) + ": " + what), episode_(episode) {}

    std::size_t episode() const { return episode_; }

private:
    std::size_t episode_;
};

}  // namespace dpbench
