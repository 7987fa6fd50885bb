#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "llmmc/oracle.hpp"

namespace llmmc {

enum class OracleKind { ollama, scripted, constant };

std::string_view to_string(OracleKind kind);
/// Throws Error(usage) for unknown names.
OracleKind oracle_kind_from_string(std::string_view text);

struct OracleConfig {
    OracleKind kind = OracleKind::constant;
    std::string endpoint = "http://localhost:11434";
    std::string model_name;
    std::int64_t seed = 42;
    double temperature = 0.0;
    int max_output_tokens = 256;
    std::optional<std::string> default_action;
    std::optional<std::filesystem::path> cache_path;
    double request_timeout_s = 600.0;
};

/// Append-only prompt/response store. Backed by a JSON-lines file when a path
/// is given; entries already present are never overwritten.
class ResponseCache {
public:
    ResponseCache() = default;
    explicit ResponseCache(std::filesystem::path path);

    std::optional<std::string> lookup(const std::string& key) const;
    void store(const std::string& key, const std::string& value);
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::string> entries_;
    std::optional<std::filesystem::path> path_;
    std::ofstream out_;
};

/// Hex SHA-256 over the request fields that influence the response.
std::string cache_key(const OracleConfig& config, const std::string& prompt);

/// JSON body sent to {endpoint}/api/generate.
nlohmann::json generate_request_body(const OracleConfig& config, const std::string& prompt);

/// Blocking client for the Ollama generate endpoint. Thread-safe.
class OllamaClient final : public TextGenerator {
public:
    OllamaClient(OracleConfig config, std::shared_ptr<ResponseCache> cache);

    /// Cached response or one HTTP round trip. Throws Error(oracle) on
    /// transport failures, timeouts, non-2xx statuses and malformed bodies.
    std::string generate(const std::string& prompt) override;
    OracleCounters counters() const override;

    const OracleConfig& config() const noexcept { return config_; }

private:
    std::string request(const std::string& prompt) const;

    OracleConfig config_;
    std::shared_ptr<ResponseCache> cache_;
    std::string base_url_;
    std::string path_prefix_;
    std::atomic<std::size_t> llm_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace llmmc
