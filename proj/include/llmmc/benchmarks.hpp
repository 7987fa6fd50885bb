#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "llmmc/oracle.hpp"

namespace llmmc {

struct BenchmarkFixture {
    std::string name;
    std::filesystem::path directory;
    std::filesystem::path model_path;
    std::filesystem::path template_path;
    std::filesystem::path var_map_path;
    std::filesystem::path properties_path;
    /// Shipped state -> action tables, one per scripted policy.
    std::filesystem::path policy_dir;
    std::vector<std::string> properties;
    std::vector<std::string> scripted_policies;

    std::filesystem::path policy_table(std::string_view policy) const;
};

/// frozen_lake, taxi, stock_market.
const std::vector<std::string>& benchmark_names();

/// Fixture root; the LLMMC_BENCHMARK_DIR environment variable overrides the
/// build-time default.
std::filesystem::path benchmark_root();

/// Throws Error(usage) for an unknown name and Error(io) if files are missing.
BenchmarkFixture fixture(std::string_view name);

/// Names of the rule-based reference policies of a benchmark.
std::vector<std::string> scripted_policies(std::string_view benchmark);

/// Throws Error(usage) for unknown benchmark or policy names.
std::unique_ptr<PolicyOracle> make_scripted_policy(std::string_view benchmark, std::string_view policy);

/// Runs a rule policy over its own induced chain and returns the decision of
/// every reachable non-terminal state, keyed by MdpSemantics::render().
std::map<std::string, std::string> policy_table(const MdpSemantics& mdp, PolicyOracle& policy);

}  // namespace llmmc
