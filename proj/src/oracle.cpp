#include "llmmc/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "llmmc/error.hpp"

namespace llmmc {

namespace {

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string lowercase(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string read_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, std::string("cannot read ") + what + " " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Placeholders as (start offset, length, name).
struct Placeholder {
    std::size_t start;
    std::size_t length;
    std::string name;
};

std::vector<Placeholder> find_placeholders(std::string_view text) {
    std::vector<Placeholder> out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        std::size_t j = i + 1;
        if (j >= text.size() || !(std::isalpha(static_cast<unsigned char>(text[j])) || text[j] == '_')) continue;
        while (j < text.size() && word_char(text[j])) ++j;
        if (j < text.size() && text[j] == '}') {
            out.push_back({i, j + 1 - i, std::string(text.substr(i + 1, j - i - 1))});
            i = j;
        }
    }
    return out;
}

std::string strip_think(std::string_view raw) {
    std::string lower = lowercase(raw);
    std::string out;
    std::size_t pos = 0;
    while (pos < raw.size()) {
        std::size_t open = lower.find("<think>", pos);
        if (open == std::string::npos) {
            out.append(raw.substr(pos));
            break;
        }
        out.append(raw.substr(pos, open - pos));
        std::size_t close = lower.find("</think>", open);
        if (close == std::string::npos) break;  // unterminated: drop the rest
        pos = close + 8;
    }
    return out;
}

std::string_view trim(std::string_view text) {
    auto junk = [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isspace(u) || std::ispunct(u);
    };
    while (!text.empty() && junk(text.front())) text.remove_prefix(1);
    while (!text.empty() && junk(text.back())) text.remove_suffix(1);
    return text;
}

bool contains(const std::vector<std::string>& list, std::string_view item) {
    return std::find(list.begin(), list.end(), item) != list.end();
}

ActionDecision fallback(std::string raw, const std::vector<std::string>& enabled,
                        const std::optional<std::string>& default_action) {
    if (enabled.empty()) {
        throw Error(ErrorKind::invalid_model, "no enabled action to fall back to");
    }
    if (default_action && contains(enabled, *default_action)) {
        return {*default_action, std::move(raw), true, DecisionSource::fallback_default};
    }
    return {enabled.front(), std::move(raw), true, DecisionSource::fallback_first_enabled};
}

ActionDecision scripted_choice(const std::string& proposed, const MdpSemantics& mdp, const StateVector& s,
                               const std::optional<std::string>& default_action) {
    std::vector<std::string> enabled = mdp.enabled_actions(s);
    if (contains(enabled, proposed)) {
        return {proposed, proposed, false, DecisionSource::scripted};
    }
    return fallback(proposed, enabled, default_action);
}

}  // namespace

PromptTemplate PromptTemplate::from_text(std::string text) {
    PromptTemplate t;
    for (const auto& p : find_placeholders(text)) t.required_vars.insert(p.name);
    t.text = std::move(text);
    return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
    return from_text(read_file(path, "prompt template"));
}

VarMap load_var_map(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path, "variable map"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::io, "variable map " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::io, "variable map " + path.string() + " must be a JSON object");
    VarMap out;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string()) throw Error(ErrorKind::io, "variable map entry '" + key + "' must be a string");
        out.emplace(key, value.get<std::string>());
    }
    return out;
}

std::string encode_state(const PromptTemplate& prompt, const MdpSemantics& mdp, const StateVector& s,
                         const VarMap& var_map) {
    std::string out;
    std::size_t pos = 0;
    for (const auto& p : find_placeholders(prompt.text)) {
        out.append(prompt.text, pos, p.start - pos);
        auto mapped = var_map.find(p.name);
        const std::string& variable = mapped == var_map.end() ? p.name : mapped->second;
        std::size_t idx = 0;
        try {
            idx = mdp.variable_index(variable);
        } catch (const Error&) {
            throw Error(ErrorKind::unknown_identifier,
                        "prompt placeholder {" + p.name + "} does not resolve to a model variable");
        }
        out += std::to_string(s.values.at(idx));
        pos = p.start + p.length;
    }
    out.append(prompt.text, pos, std::string::npos);
    return out;
}

std::string_view to_string(DecisionSource source) {
    switch (source) {
        case DecisionSource::exact_match: return "exact_match";
        case DecisionSource::keyword_match: return "keyword_match";
        case DecisionSource::fallback_default: return "fallback_default";
        case DecisionSource::fallback_first_enabled: return "fallback_first_enabled";
        case DecisionSource::scripted: return "scripted";
    }
    return "unknown";
}

ActionDecision parse_action(std::string_view raw, const std::vector<std::string>& declared,
                            const std::vector<std::string>& enabled, const std::optional<std::string>& default_action) {
    std::string visible = strip_think(raw);
    std::string_view core = trim(visible);
    std::string core_lower = lowercase(core);

    std::optional<std::string> match;
    DecisionSource source = DecisionSource::exact_match;
    for (const auto& action : declared) {
        if (lowercase(action) == core_lower) {
            match = action;
            break;
        }
    }
    if (!match) {
        std::string haystack = lowercase(visible);
        std::size_t best_pos = 0;
        std::size_t best_len = 0;
        for (const auto& action : declared) {
            std::string needle = lowercase(action);
            if (needle.empty()) continue;
            for (std::size_t at = haystack.find(needle); at != std::string::npos; at = haystack.find(needle, at + 1)) {
                bool left_ok = at == 0 || !word_char(haystack[at - 1]);
                std::size_t end = at + needle.size();
                bool right_ok = end >= haystack.size() || !word_char(haystack[end]);
                if (!left_ok || !right_ok) continue;
                if (!match || at > best_pos || (at == best_pos && needle.size() > best_len)) {
                    match = action;
                    best_pos = at;
                    best_len = needle.size();
                }
            }
        }
        source = DecisionSource::keyword_match;
    }
    if (match && contains(enabled, *match)) {
        return {*match, std::string(raw), false, source};
    }
    return fallback(std::string(raw), enabled, default_action);
}

LlmPolicy::LlmPolicy(std::shared_ptr<TextGenerator> generator, PromptTemplate prompt, VarMap var_map,
                     std::optional<std::string> default_action)
    : generator_(std::move(generator)),
      prompt_(std::move(prompt)),
      var_map_(std::move(var_map)),
      default_action_(std::move(default_action)) {}

ActionDecision LlmPolicy::decide(const MdpSemantics& mdp, const StateVector& s) {
    std::string prompt = encode_state(prompt_, mdp, s, var_map_);
    std::string raw = generator_->generate(prompt);
    return parse_action(raw, mdp.actions(), mdp.enabled_actions(s), default_action_);
}

ConstantPolicy::ConstantPolicy(std::string action, std::optional<std::string> default_action)
    : action_(std::move(action)), default_action_(std::move(default_action)) {}

ActionDecision ConstantPolicy::decide(const MdpSemantics& mdp, const StateVector& s) {
    return scripted_choice(action_, mdp, s, default_action_);
}

TablePolicy::TablePolicy(std::map<std::string, std::string> table, std::optional<std::string> default_action)
    : table_(std::move(table)), default_action_(std::move(default_action)) {}

TablePolicy TablePolicy::load(const std::filesystem::path& path, std::optional<std::string> default_action) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path, "scripted policy"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::io, "scripted policy " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::io, "scripted policy " + path.string() + " must be a JSON object");
    std::map<std::string, std::string> table;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string()) throw Error(ErrorKind::io, "scripted policy entry '" + key + "' must be a string");
        table.emplace(key, value.get<std::string>());
    }
    return TablePolicy(std::move(table), std::move(default_action));
}

ActionDecision TablePolicy::decide(const MdpSemantics& mdp, const StateVector& s) {
    auto it = table_.find(mdp.render(s));
    return scripted_choice(it == table_.end() ? std::string() : it->second, mdp, s, default_action_);
}

RulePolicy::RulePolicy(Rule rule) : rule_(std::move(rule)) {}

ActionDecision RulePolicy::decide(const MdpSemantics& mdp, const StateVector& s) {
    return scripted_choice(rule_(mdp, s), mdp, s, std::nullopt);
}

}  // namespace llmmc
