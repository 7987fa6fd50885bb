#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "llmmc/semantics.hpp"

namespace llmmc {

/// Prompt text with `{name}` placeholders. Braces around anything that is not
/// an identifier are left as literal text.
struct PromptTemplate {
    std::string text;
    std::set<std::string> required_vars;

    static PromptTemplate from_text(std::string text);
    static PromptTemplate load(const std::filesystem::path& path);
};

/// Placeholder name -> model variable. Placeholders missing from the map
/// refer to the variable of the same name.
using VarMap = std::map<std::string, std::string>;

VarMap load_var_map(const std::filesystem::path& path);

/// Replaces every placeholder by the decimal value of its variable.
/// Throws Error(unknown_identifier) for placeholders that name no variable.
std::string encode_state(const PromptTemplate& prompt, const MdpSemantics& mdp, const StateVector& s,
                         const VarMap& var_map);

enum class DecisionSource { exact_match, keyword_match, fallback_default, fallback_first_enabled, scripted };

std::string_view to_string(DecisionSource source);

struct ActionDecision {
    std::string action;
    std::string raw_output;
    bool faulty = false;
    DecisionSource source = DecisionSource::scripted;

    friend bool operator==(const ActionDecision&, const ActionDecision&) = default;
};

/// Turns free text into an enabled action:
///  1. drop <think>...</think> regions,
///  2. trim whitespace and punctuation,
///  3. an exact case-insensitive action name wins,
///  4. otherwise the last whole-word action name in the text,
///  5. otherwise (or if that action is not enabled) fall back to the default
///     action when enabled, else the first enabled action. Fallbacks are faulty.
/// `enabled` must be nonempty and ordered as in `declared`.
ActionDecision parse_action(std::string_view raw, const std::vector<std::string>& declared,
                            const std::vector<std::string>& enabled, const std::optional<std::string>& default_action);

struct OracleCounters {
    std::size_t llm_calls = 0;
    std::size_t cache_hits = 0;
};

/// A memoryless deterministic policy. decide() may be called concurrently for
/// different states.
class PolicyOracle {
public:
    virtual ~PolicyOracle() = default;
    /// `s` must have at least one enabled action.
    virtual ActionDecision decide(const MdpSemantics& mdp, const StateVector& s) = 0;
    virtual OracleCounters counters() const { return {}; }
};

/// Source of LLM output for a prompt.
class TextGenerator {
public:
    virtual ~TextGenerator() = default;
    virtual std::string generate(const std::string& prompt) = 0;
    virtual OracleCounters counters() const { return {}; }
};

/// pi(s) = parse_action(generate(encode_state(s))).
class LlmPolicy final : public PolicyOracle {
public:
    LlmPolicy(std::shared_ptr<TextGenerator> generator, PromptTemplate prompt, VarMap var_map,
              std::optional<std::string> default_action);

    ActionDecision decide(const MdpSemantics& mdp, const StateVector& s) override;
    OracleCounters counters() const override { return generator_->counters(); }

private:
    std::shared_ptr<TextGenerator> generator_;
    PromptTemplate prompt_;
    VarMap var_map_;
    std::optional<std::string> default_action_;
};

/// Always proposes the same action.
class ConstantPolicy final : public PolicyOracle {
public:
    explicit ConstantPolicy(std::string action, std::optional<std::string> default_action = std::nullopt);
    ActionDecision decide(const MdpSemantics& mdp, const StateVector& s) override;

private:
    std::string action_;
    std::optional<std::string> default_action_;
};

/// Looks the action up in a table keyed by MdpSemantics::render().
class TablePolicy final : public PolicyOracle {
public:
    explicit TablePolicy(std::map<std::string, std::string> table,
                         std::optional<std::string> default_action = std::nullopt);
    /// Reads a JSON object {"pos=0": "down", ...}.
    static TablePolicy load(const std::filesystem::path& path, std::optional<std::string> default_action = std::nullopt);

    ActionDecision decide(const MdpSemantics& mdp, const StateVector& s) override;
    const std::map<std::string, std::string>& table() const noexcept { return table_; }

private:
    std::map<std::string, std::string> table_;
    std::optional<std::string> default_action_;
};

/// Wraps a rule written in code.
class RulePolicy final : public PolicyOracle {
public:
    using Rule = std::function<std::string(const MdpSemantics&, const StateVector&)>;
    explicit RulePolicy(Rule rule);
    ActionDecision decide(const MdpSemantics& mdp, const StateVector& s) override;

private:
    Rule rule_;
};

}  // namespace llmmc
