#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "llmmc/checker.hpp"
#include "llmmc/dtmc.hpp"
#include "llmmc/llm_client.hpp"

namespace llmmc {

inline constexpr int kReportSchemaVersion = 1;

enum ExitCode : int {
    exit_ok = 0,
    exit_violated = 2,
    exit_timeout = 3,
    exit_input_error = 4,
    exit_oracle_error = 5,
};

int exit_code_for(ErrorKind kind);

struct RunConfig {
    std::filesystem::path model_path;
    /// "NAME=VALUE" strings.
    std::vector<std::string> constant_overrides;
    std::optional<std::string> property_text;
    std::optional<std::filesystem::path> property_path;

    OracleConfig oracle;
    bool strict_faulty = false;
    std::optional<std::filesystem::path> template_path;
    std::optional<std::filesystem::path> var_map_path;
    /// A JSON table file, or "<benchmark>:<policy>" for a built-in rule.
    std::optional<std::string> scripted_policy;
    std::optional<std::string> constant_action;

    std::size_t max_states = 0;
    double timeout_s = 18000.0;
    std::size_t prefetch_workers = 0;
    bool direct_solve = false;
    bool cross_check = false;

    std::optional<std::filesystem::path> export_tra;
    std::optional<std::filesystem::path> export_lab;
    std::optional<std::filesystem::path> report_path;
    std::optional<std::filesystem::path> decision_log_path;
};

nlohmann::ordered_json to_json(const RunConfig& config);

struct PropertyOutcome {
    std::string property;
    CheckResult result;
    double check_time_s = 0.0;
};

struct ReportDiagnostic {
    std::string kind;
    std::string message;
};

struct VerificationReport {
    /// ok | violated | timeout | state_limit | input_error | oracle_error
    std::string status = "ok";
    int exit_code = exit_ok;
    bool timed_out = false;
    /// Build statistics; partial when the build was aborted.
    std::optional<BuildStats> build;
    bool build_complete = false;
    std::vector<PropertyOutcome> properties;
    double check_time_s = 0.0;
    double total_time_s = 0.0;
    std::vector<ReportDiagnostic> diagnostics;
    RunConfig config;
};

/// Stable, versioned report layout (documented in README).
nlohmann::ordered_json to_json(const VerificationReport& report);

/// parse -> validate -> resolve -> build -> check. Never throws for pipeline
/// failures; they are reported through status, exit_code and diagnostics.
/// Writes exports and the report file when configured.
VerificationReport run_verify(const RunConfig& config);

/// As run_verify without a property: builds and exports the chain.
VerificationReport run_build_only(const RunConfig& config);

/// Table with one row per report file (*.json) in `dir`, sorted by file name.
std::string render_report_table(const std::filesystem::path& dir);

}  // namespace llmmc
