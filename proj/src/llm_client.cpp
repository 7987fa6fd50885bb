#include "llmmc/llm_client.hpp"

#include <chrono>
#include <cstdio>

#include <httplib.h>
#include <openssl/evp.h>

#include "llmmc/error.hpp"

namespace llmmc {

std::string_view to_string(OracleKind kind) {
    switch (kind) {
        case OracleKind::ollama: return "ollama";
        case OracleKind::scripted: return "scripted";
        case OracleKind::constant: return "constant";
    }
    return "unknown";
}

OracleKind oracle_kind_from_string(std::string_view text) {
    if (text == "ollama") return OracleKind::ollama;
    if (text == "scripted") return OracleKind::scripted;
    if (text == "constant") return OracleKind::constant;
    throw Error(ErrorKind::usage, "unknown oracle kind '" + std::string(text) + "'");
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(*path_);
    if (!in) return;  // a missing cache file is an empty cache
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            entries_.emplace(j.at("key").get<std::string>(), j.at("value").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::io, "malformed cache entry at " + path_->string() + ":" + std::to_string(line_no) +
                                           ": " + e.what());
        }
    }
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::store(const std::string& key, const std::string& value) {
    std::unique_lock lock(mutex_);
    if (!entries_.emplace(key, value).second) return;
    if (!path_) return;
    if (!out_.is_open()) {
        if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
        out_.open(*path_, std::ios::app | std::ios::binary);
        if (!out_) throw Error(ErrorKind::io, "cannot append to cache file " + path_->string());
    }
    nlohmann::json j = {{"key", key}, {"value", value}};
    out_ << j.dump() << '\n';
    out_.flush();
}

std::size_t ResponseCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::string cache_key(const OracleConfig& config, const std::string& prompt) {
    nlohmann::json j = {{"model", config.model_name},
                        {"seed", config.seed},
                        {"temperature", config.temperature},
                        {"num_predict", config.max_output_tokens},
                        {"prompt", prompt}};
    std::string canonical = j.dump();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(canonical.data(), canonical.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::oracle, "SHA-256 computation failed");
    }
    std::string hex;
    hex.reserve(length * 2);
    static constexpr char kDigits[] = "0123456789abcdef";
    for (unsigned int i = 0; i < length; ++i) {
        hex += kDigits[digest[i] >> 4];
        hex += kDigits[digest[i] & 0xF];
    }
    return hex;
}

nlohmann::json generate_request_body(const OracleConfig& config, const std::string& prompt) {
    return {{"model", config.model_name},
            {"prompt", prompt},
            {"stream", false},
            {"options",
             {{"seed", config.seed}, {"temperature", config.temperature}, {"num_predict", config.max_output_tokens}}}};
}

OllamaClient::OllamaClient(OracleConfig config, std::shared_ptr<ResponseCache> cache)
    : config_(std::move(config)), cache_(cache ? std::move(cache) : std::make_shared<ResponseCache>()) {
    std::string_view url = config_.endpoint;
    auto scheme = url.find("://");
    std::size_t host_start = scheme == std::string_view::npos ? 0 : scheme + 3;
    auto slash = url.find('/', host_start);
    if (slash == std::string_view::npos) {
        base_url_ = std::string(url);
    } else {
        base_url_ = std::string(url.substr(0, slash));
        path_prefix_ = std::string(url.substr(slash));
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
    if (scheme == std::string_view::npos) base_url_ = "http://" + base_url_;
}

std::string OllamaClient::generate(const std::string& prompt) {
    std::string key = cache_key(config_, prompt);
    if (std::optional<std::string> hit = cache_->lookup(key)) {
        ++cache_hits_;
        return *hit;
    }
    std::string response = request(prompt);
    ++llm_calls_;
    cache_->store(key, response);
    return response;
}

OracleCounters OllamaClient::counters() const { return {llm_calls_.load(), cache_hits_.load()}; }

std::string OllamaClient::request(const std::string& prompt) const {
    httplib::Client client(base_url_);
    auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(config_.request_timeout_s));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    std::string path = path_prefix_ + "/api/generate";
    std::string body = generate_request_body(config_, prompt).dump();
    httplib::Result result = client.Post(path, body, "application/json");
    if (!result) {
        httplib::Error err = result.error();
        std::string what = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout
                               ? "request timed out"
                               : "transport error: " + httplib::to_string(err);
        throw Error(ErrorKind::oracle, "LLM endpoint " + config_.endpoint + path + ": " + what);
    }
    if (result->status < 200 || result->status >= 300) {
        throw Error(ErrorKind::oracle,
                    "LLM endpoint " + config_.endpoint + path + " returned HTTP " + std::to_string(result->status));
    }
    try {
        nlohmann::json j = nlohmann::json::parse(result->body);
        const auto& field = j.at("response");
        if (!field.is_string()) throw Error(ErrorKind::oracle, "field 'response' is not a string");
        return field.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::oracle, "malformed response from LLM endpoint: " + std::string(e.what()));
    } catch (const Error& e) {
        throw Error(ErrorKind::oracle, "malformed response from LLM endpoint: " + e.detail());
    }
}

}  // namespace llmmc
