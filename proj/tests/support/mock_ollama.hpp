#pragma once

// In-process stand-in for the Ollama generate endpoint.

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

namespace oracle {

class MockOllama {
public:
    /// Maps a prompt to the "response" text.
    using Responder = std::function<std::string(const std::string& prompt)>;

    explicit MockOllama(Responder responder) : responder_(std::move(responder)) {
        server_.Post("/api/generate", [this](const httplib::Request& req, httplib::Response& res) {
            {
                std::lock_guard lock(mutex_);
                bodies_.push_back(req.body);
            }
            ++calls_;
            if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
            if (!raw_body_.empty()) {
                res.set_content(raw_body_, "application/json");
                return;
            }
            nlohmann::json body = nlohmann::json::parse(req.body);
            nlohmann::json out = {{"model", body.value("model", "")},
                                  {"response", responder_(body.at("prompt").get<std::string>())},
                                  {"done", true}};
            res.set_content(out.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockOllama() {
        server_.stop();
        thread_.join();
    }

    MockOllama(const MockOllama&) = delete;
    MockOllama& operator=(const MockOllama&) = delete;

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
    std::size_t calls() const { return calls_.load(); }
    std::vector<std::string> bodies() const {
        std::lock_guard lock(mutex_);
        return bodies_;
    }

    /// Served verbatim instead of a well-formed reply.
    void set_raw_body(std::string body) { raw_body_ = std::move(body); }
    void set_delay(std::chrono::milliseconds d) { delay_ = d; }

private:
    Responder responder_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<std::size_t> calls_{0};
    mutable std::mutex mutex_;
    std::vector<std::string> bodies_;
    std::string raw_body_;
    std::chrono::milliseconds delay_{0};
};

/// Extracts the integer after `key=` in a prompt, or -1.
inline long prompt_value(const std::string& prompt, const std::string& key) {
    auto at = prompt.find(key + "=");
    if (at == std::string::npos) return -1;
    return std::stol(prompt.substr(at + key.size() + 1));
}

}  // namespace oracle
