#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llmmc/expr.hpp"

namespace llmmc {

enum class ModelKind { mdp };

struct ConstantDef {
    std::string name;
    ValueType type = ValueType::integer;
    std::optional<Expr> value;  // absent until supplied by an override

    friend bool operator==(const ConstantDef&, const ConstantDef&) = default;
};

/// Bounded integer variable. Boolean declarations are stored as [0..1] with
/// `boolean` set, so expressions still see them as booleans.
struct VariableDecl {
    std::string name;
    Expr lower;
    Expr upper;
    std::optional<Expr> init;  // defaults to the lower bound
    bool boolean = false;

    friend bool operator==(const VariableDecl&, const VariableDecl&) = default;
};

struct Assignment {
    std::string variable;
    Expr value;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct Branch {
    Expr probability;
    std::vector<Assignment> assignments;  // empty means "true" (no change)

    friend bool operator==(const Branch&, const Branch&) = default;
};

struct Command {
    std::string action;
    Expr guard;
    std::vector<Branch> branches;

    friend bool operator==(const Command&, const Command&) = default;
};

struct LabelDef {
    std::string name;
    Expr condition;

    friend bool operator==(const LabelDef&, const LabelDef&) = default;
};

/// Reward structures are kept as opaque text; nothing evaluates them.
struct RewardDef {
    std::string name;
    std::string body;

    friend bool operator==(const RewardDef&, const RewardDef&) = default;
};

struct SymbolicModel {
    ModelKind kind = ModelKind::mdp;
    std::string module_name;
    std::vector<ConstantDef> constants;
    std::vector<VariableDecl> variables;
    std::vector<Command> commands;
    std::vector<LabelDef> labels;
    std::vector<RewardDef> rewards;

    /// Action labels in order of first appearance in the command list.
    std::vector<std::string> actions() const;
    const VariableDecl* find_variable(std::string_view name) const;
    const ConstantDef* find_constant(std::string_view name) const;

    friend bool operator==(const SymbolicModel&, const SymbolicModel&) = default;
};

/// Parses the supported PRISM subset: one module, mdp only, labelled commands.
/// Throws Error(syntax | duplicate_identifier | unknown_identifier | bound_violation).
SymbolicModel parse_model(std::string_view text);

SymbolicModel load_model(const std::filesystem::path& path);

/// Canonical concrete syntax. parse_model(print_model(m)) == m.
std::string print_model(const SymbolicModel& model);

struct Diagnostic {
    std::string code;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Static checks that need no state exploration. An empty result means the
/// model is well formed as far as can be decided without exploration.
std::vector<Diagnostic> validate_model(const SymbolicModel& model);

/// Values for every constant, in declaration order. Throws
/// Error(missing_override) when an undefined constant has no value.
std::map<std::string, Value> constant_values(const SymbolicModel& model);

/// Substitutes every constant by its value. `overrides` may only name
/// declared constants and must cover the undefined ones.
SymbolicModel resolve_constants(const SymbolicModel& model, const std::map<std::string, Value>& overrides);

/// Parses "N=4", "p=0.25", "flag=true" as given on the command line.
std::pair<std::string, Value> parse_constant_override(std::string_view text);

}  // namespace llmmc
