#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "formnav/errors.hpp"
#include "formnav/llm.hpp"

using json = nlohmann::json;
using namespace formnav;
using namespace formnav::llm;

namespace {

// fails the first `failures` requests with `fail_status`, then succeeds
struct FakeProvider {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> requests{0};
    int failures = 0;
    int fail_status = 429;

    explicit FakeProvider(int failures_before_ok, int status = 429)
        : failures(failures_before_ok), fail_status(status) {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
            int n = ++requests;
            res.set_header("x-request-id", "req-" + std::to_string(n));
            if (n <= failures) {
                res.status = fail_status;
                res.set_content("{}", "application/json");
                return;
            }
            json body = json::parse(req.body);
            std::string last = body["messages"].back()["content"];
            json reply{{"choices",
                        {{{"message", {{"role", "assistant"},
                                       {"content", "echo: " + last}}}}}}};
            res.set_content(reply.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~FakeProvider() {
        server.stop();
        thread.join();
    }

    LlmConfig config() const {
        LlmConfig c;
        c.mode = LlmMode::live;
        c.endpoint = "http://127.0.0.1:" + std::to_string(port) +
                     "/v1/chat/completions";
        c.api_key_env = "FORMNAV_TEST_KEY";
        c.backoff_ms = 1;
        return c;
    }
};

struct EnvKey {
    explicit EnvKey(const char* value) {
        setenv("FORMNAV_TEST_KEY", value, 1);
    }
    ~EnvKey() { unsetenv("FORMNAV_TEST_KEY"); }
};

const std::vector<Message> kChat{{"system", "You write tests."},
                                 {"user", "Describe the click.\nDetails."}};

}  // namespace

TEST_CASE("stub completions are deterministic and prompt-sensitive") {
    LlmConfig c;
    LlmClient a(c), b(c);
    std::string r1 = a.complete(kChat);
    CHECK(r1 == b.complete(kChat));
    CHECK_FALSE(r1.empty());
    CHECK(r1.find("Describe the click.") != std::string::npos);
    CHECK(r1.find("Details.") == std::string::npos);  // first line only
    std::string r2 = a.complete({{"user", "Something else"}});
    CHECK(r1 != r2);
}

TEST_CASE("canned stub responses are served in order, last repeats") {
    LlmConfig c;
    c.stub_responses = {"one", "two"};
    LlmClient client(c);
    CHECK(client.complete(kChat) == "one");
    CHECK(client.complete(kChat) == "two");
    CHECK(client.complete(kChat) == "two");
}

TEST_CASE("empty conversation is rejected") {
    LlmClient client(LlmConfig{});
    CHECK_THROWS_AS(client.complete({}), InvalidSpec);
}

TEST_CASE("live mode without the key env var fails before any request") {
    FakeProvider provider(0);
    unsetenv("FORMNAV_TEST_KEY");
    LlmClient client(provider.config());
    CHECK_THROWS_AS(client.complete(kChat), AuthMissing);
    CHECK(provider.requests == 0);
}

TEST_CASE("429 then 200 succeeds with one retry recorded") {
    FakeProvider provider(1, 429);
    EnvKey key("secret");
    LlmConfig c = provider.config();
    c.max_retries = 2;
    LlmClient client(c);
    std::string reply = client.complete(kChat);
    CHECK(reply == "echo: Describe the click.\nDetails.");
    CHECK(client.last_retries() == 1);
    CHECK(provider.requests == 2);
}

TEST_CASE("retries exhausted surfaces ProviderError with status") {
    FakeProvider provider(99, 503);
    EnvKey key("secret");
    LlmConfig c = provider.config();
    c.max_retries = 1;
    LlmClient client(c);
    try {
        client.complete(kChat);
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.status() == 503);
        CHECK(std::string(e.what()).find("req-") != std::string::npos);
    }
    CHECK(provider.requests == 2);
}

TEST_CASE("non-retryable statuses fail immediately") {
    FakeProvider provider(99, 400);
    EnvKey key("secret");
    LlmConfig c = provider.config();
    c.max_retries = 3;
    LlmClient client(c);
    CHECK_THROWS_AS(client.complete(kChat), ProviderError);
    CHECK(provider.requests == 1);
}

TEST_CASE("config json round trip and schema guard") {
    LlmConfig c;
    c.mode = LlmMode::live;
    c.endpoint = "http://provider.test/v1/chat/completions";
    c.model = "judge-1";
    c.api_key_env = "MY_KEY";
    c.temperature = 0.5;
    c.max_retries = 7;
    LlmConfig back = llm_config_from_json(llm_config_to_json(c));
    CHECK(back.mode == LlmMode::live);
    CHECK(back.endpoint == c.endpoint);
    CHECK(back.model == c.model);
    CHECK(back.api_key_env == c.api_key_env);
    CHECK(back.temperature == doctest::Approx(0.5));
    CHECK(back.max_retries == 7);
    CHECK_THROWS_AS(llm_config_from_json("{}"), SchemaViolation);
    CHECK_THROWS_AS(llm_config_from_json("nope"), SchemaViolation);
}
