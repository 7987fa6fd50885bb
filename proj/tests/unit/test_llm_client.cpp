#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "../support/mock_ollama.hpp"
#include "llmmc/error.hpp"
#include "llmmc/llm_client.hpp"

using namespace llmmc;

namespace {

OracleConfig config_for(const oracle::MockOllama& server) {
    OracleConfig c;
    c.kind = OracleKind::ollama;
    c.endpoint = server.endpoint();
    c.model_name = "llama3.2:3b";
    return c;
}

std::filesystem::path temp_file(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove(p);
    return p;
}

}  // namespace

TEST_CASE("request body carries exactly the generate fields") {
    OracleConfig c;
    c.model_name = "gemma3:4b";
    nlohmann::json body = generate_request_body(c, "hello");
    CHECK(body == nlohmann::json::parse(
                      R"({"model":"gemma3:4b","prompt":"hello","stream":false,
                          "options":{"seed":42,"temperature":0.0,"num_predict":256}})"));
}

TEST_CASE("cache keys depend on every request field") {
    OracleConfig c;
    c.model_name = "m";
    std::string k = cache_key(c, "p");
    CHECK(k.size() == 64);
    CHECK(cache_key(c, "p") == k);
    CHECK(cache_key(c, "q") != k);
    OracleConfig seed = c;
    seed.seed = 7;
    CHECK(cache_key(seed, "p") != k);
    OracleConfig temp = c;
    temp.temperature = 0.5;
    CHECK(cache_key(temp, "p") != k);
    OracleConfig model = c;
    model.model_name = "n";
    CHECK(cache_key(model, "p") != k);
}

TEST_CASE("round trip against the mock server") {
    oracle::MockOllama server([](const std::string& prompt) { return "echo:" + prompt; });
    OllamaClient client(config_for(server), nullptr);
    CHECK(client.generate("abc") == "echo:abc");
    CHECK(client.generate("abc") == "echo:abc");
    CHECK(server.calls() == 1);
    CHECK(client.counters().llm_calls == 1);
    CHECK(client.counters().cache_hits == 1);

    auto bodies = server.bodies();
    REQUIRE(bodies.size() == 1);
    nlohmann::json sent = nlohmann::json::parse(bodies[0]);
    CHECK(sent["model"] == "llama3.2:3b");
    CHECK(sent["prompt"] == "abc");
    CHECK(sent["stream"] == false);
    CHECK(sent["options"]["seed"] == 42);
    CHECK(sent["options"]["temperature"] == 0.0);
    CHECK(sent["options"]["num_predict"] == 256);
    CHECK(sent.size() == 4);
    CHECK(sent["options"].size() == 3);
}

TEST_CASE("endpoint paths are honoured") {
    oracle::MockOllama server([](const std::string&) { return "x"; });
    OracleConfig c = config_for(server);
    c.endpoint = server.endpoint() + "/";
    OllamaClient client(c, nullptr);
    CHECK(client.generate("p") == "x");
}

TEST_CASE("malformed responses are oracle errors") {
    for (const char* body : {"not json", R"({"done": true})", R"({"response": 3})"}) {
        CAPTURE(body);
        oracle::MockOllama server([](const std::string&) { return ""; });
        server.set_raw_body(body);
        OllamaClient client(config_for(server), nullptr);
        try {
            client.generate("p");
            FAIL("expected an oracle error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::oracle);
        }
    }
}

TEST_CASE("unreachable endpoints and timeouts are oracle errors") {
    OracleConfig c;
    c.endpoint = "http://127.0.0.1:1";
    c.model_name = "m";
    c.request_timeout_s = 2;
    OllamaClient client(c, nullptr);
    CHECK_THROWS_AS(client.generate("p"), Error);

    oracle::MockOllama slow([](const std::string&) { return "x"; });
    slow.set_delay(std::chrono::milliseconds(500));
    OracleConfig t = config_for(slow);
    t.request_timeout_s = 0.1;
    OllamaClient impatient(t, nullptr);
    try {
        impatient.generate("p");
        FAIL("expected a timeout");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::oracle);
        CHECK(std::string(e.what()).find("timed out") != std::string::npos);
    }
}

TEST_CASE("persistent cache survives restarts and never overwrites") {
    auto path = temp_file("llmmc_cache_test.jsonl");
    {
        ResponseCache cache(path);
        cache.store("k1", "v1");
        cache.store("k1", "other");
        cache.store("k2", "line\nbreak \"quoted\"");
        CHECK(cache.lookup("k1") == "v1");
    }
    ResponseCache reopened(path);
    CHECK(reopened.size() == 2);
    CHECK(reopened.lookup("k1") == "v1");
    CHECK(reopened.lookup("k2") == "line\nbreak \"quoted\"");
    CHECK_FALSE(reopened.lookup("k3").has_value());

    std::ofstream(path, std::ios::app) << "{broken\n";
    CHECK_THROWS_AS(ResponseCache{path}, Error);
    std::filesystem::remove(path);
}

TEST_CASE("warm cache answers without HTTP") {
    auto path = temp_file("llmmc_cache_warm.jsonl");
    oracle::MockOllama server([](const std::string& p) { return "r" + p; });
    {
        OllamaClient cold(config_for(server), std::make_shared<ResponseCache>(path));
        for (int i = 0; i < 5; ++i) cold.generate(std::to_string(i));
    }
    CHECK(server.calls() == 5);
    OllamaClient warm(config_for(server), std::make_shared<ResponseCache>(path));
    for (int i = 0; i < 5; ++i) CHECK(warm.generate(std::to_string(i)) == "r" + std::to_string(i));
    CHECK(server.calls() == 5);
    CHECK(warm.counters().cache_hits == 5);
    CHECK(warm.counters().llm_calls == 0);
    std::filesystem::remove(path);
}

TEST_CASE("concurrent use is safe") {
    oracle::MockOllama server([](const std::string& p) { return p; });
    OllamaClient client(config_for(server), nullptr);
    std::vector<std::thread> threads;
    std::atomic<int> mismatches{0};
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&, t] {
            for (int i = 0; i < 20; ++i) {
                std::string p = std::to_string(t * 100 + i % 10);
                if (client.generate(p) != p) ++mismatches;
            }
        });
    }
    for (auto& th : threads) th.join();
    CHECK(mismatches == 0);
    CHECK(client.counters().llm_calls + client.counters().cache_hits == 160);
}
