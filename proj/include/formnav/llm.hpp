#pragma once

#include <string>
#include <vector>

namespace formnav::llm {

struct Message {
    std::string role;  // "system" | "user" | "assistant"
    std::string text;
};

enum class LlmMode { stub, live };

struct LlmConfig {
    LlmMode mode = LlmMode::stub;
    std::string endpoint;     // live: chat-completions URL
    std::string model = "stub-model";
    std::string api_key_env = "FORMNAV_API_KEY";
    double temperature = 0.0;
    int timeout_ms = 30000;
    int max_retries = 2;
    int backoff_ms = 250;  // base for exponential backoff
    // canned stub replies, consumed in call order (last one repeats);
    // empty -> deterministic echo expansion of the last user message
    std::vector<std::string> stub_responses;
};

std::string llm_config_to_json(const LlmConfig& config);
LlmConfig llm_config_from_json(const std::string& text);
LlmConfig load_llm_config(const std::string& path);

class LlmClient {
public:
    explicit LlmClient(LlmConfig config) : config_(std::move(config)) {}

    // Completion text for the conversation. Stub mode never touches the
    // network; live mode retries retryable statuses with backoff.
    std::string complete(const std::vector<Message>& messages);

    const LlmConfig& config() const { return config_; }
    int last_retries() const { return last_retries_; }

private:
    LlmConfig config_;
    size_t stub_calls_ = 0;
    int last_retries_ = 0;
};

std::string complete(const std::vector<Message>& messages,
                     const LlmConfig& config);

}  // namespace formnav::llm
