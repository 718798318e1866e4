#include "formnav/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <httplib.h>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "formnav/dom.hpp"
#include "formnav/errors.hpp"
#include "formnav/url.hpp"

namespace formnav::llm {

using json = nlohmann::json;

namespace {

char hex_digit(uint64_t v) { return "0123456789abcdef"[v & 0xf]; }

std::string hex64(uint64_t v) {
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = hex_digit(v);
        v >>= 4;
    }
    return out;
}

const Message* last_user(const std::vector<Message>& messages) {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == "user") return &*it;
    }
    return nullptr;
}

// deterministic expansion: a tagged digest plus the message's first line,
// so equal prompts give equal bytes and distinct prompts diverge
std::string stub_expand(const LlmConfig& config,
                        const std::vector<Message>& messages) {
    std::string all;
    for (const auto& m : messages) all += m.role + "\x1f" + m.text + "\x1e";
    const Message* user = last_user(messages);
    std::string first_line = user ? user->text.substr(0, user->text.find('\n'))
                                  : "";
    return "[" + config.model + " " + hex64(dom::fnv1a64(all)) + "] " +
           first_line;
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

std::string llm_config_to_json(const LlmConfig& config) {
    json j;
    j["version"] = 1;
    j["mode"] = config.mode == LlmMode::stub ? "stub" : "live";
    j["endpoint"] = config.endpoint;
    j["model"] = config.model;
    j["api_key_env"] = config.api_key_env;
    j["temperature"] = config.temperature;
    j["timeout_ms"] = config.timeout_ms;
    j["max_retries"] = config.max_retries;
    j["backoff_ms"] = config.backoff_ms;
    if (!config.stub_responses.empty()) {
        j["stub_responses"] = config.stub_responses;
    }
    return j.dump(2);
}

LlmConfig llm_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaViolation(std::string("llm config parse: ") + e.what());
    }
    if (!j.contains("version") || j["version"].get<int>() != 1) {
        throw SchemaViolation("unsupported llm config schema version");
    }
    LlmConfig c;
    std::string mode = j.value("mode", "stub");
    if (mode == "stub") c.mode = LlmMode::stub;
    else if (mode == "live") c.mode = LlmMode::live;
    else throw SchemaViolation("unknown llm mode: " + mode);
    c.endpoint = j.value("endpoint", "");
    c.model = j.value("model", c.model);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.temperature = j.value("temperature", 0.0);
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
    c.stub_responses = j.value("stub_responses", std::vector<std::string>{});
    return c;
}

LlmConfig load_llm_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return llm_config_from_json(ss.str());
}

std::string LlmClient::complete(const std::vector<Message>& messages) {
    if (messages.empty()) throw InvalidSpec("empty message list");
    last_retries_ = 0;

    if (config_.mode == LlmMode::stub) {
        if (!config_.stub_responses.empty()) {
            size_t i = std::min(stub_calls_++, config_.stub_responses.size() - 1);
            return config_.stub_responses[i];
        }
        ++stub_calls_;
        return stub_expand(config_, messages);
    }

    const char* key = nullptr;
    if (!config_.api_key_env.empty()) key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key) throw AuthMissing(config_.api_key_env);
    if (config_.endpoint.empty()) throw InvalidSpec("live mode needs an endpoint");

    std::string origin = url::origin(config_.endpoint);
    if (origin.empty()) throw InvalidSpec("bad endpoint: " + config_.endpoint);
    std::string path = config_.endpoint.substr(origin.size());
    if (path.empty()) path = "/";

    json body;
    body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    body["messages"] = json::array();
    for (const auto& m : messages) {
        body["messages"].push_back({{"role", m.role}, {"content", m.text}});
    }
    const std::string payload = body.dump();

    std::string last_error = "no attempt made";
    int last_status = 0;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            last_retries_ = attempt;
            std::this_thread::sleep_for(std::chrono::milliseconds(
                config_.backoff_ms << (attempt - 1)));
        }
        httplib::Client client(origin);
        client.set_connection_timeout(0, config_.timeout_ms * 1000LL);
        client.set_read_timeout(0, config_.timeout_ms * 1000LL);
        httplib::Headers headers{
            {"Authorization", std::string("Bearer ") + key}};
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        std::string request_id = res->get_header_value("x-request-id");
        if (request_id.empty()) request_id = "(no request id)";
        if (res->status == 200) {
            try {
                json reply = json::parse(res->body);
                return reply.at("choices").at(0).at("message").at("content")
                    .get<std::string>();
            } catch (const std::exception& e) {
                throw ProviderError(200, "malformed completion body (" +
                                             request_id + "): " + e.what());
            }
        }
        last_status = res->status;
        last_error = "request " + request_id;
        if (!retryable_status(res->status)) {
            throw ProviderError(res->status, last_error);
        }
    }
    if (last_status == 0) throw Timeout(last_error);
    throw ProviderError(last_status,
                        last_error + " after " +
                            std::to_string(config_.max_retries) + " retries");
}

std::string complete(const std::vector<Message>& messages,
                     const LlmConfig& config) {
    LlmClient client(config);
    return client.complete(messages);
}

}  // namespace formnav::llm
