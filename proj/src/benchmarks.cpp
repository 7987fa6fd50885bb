#include "llmmc/benchmarks.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "llmmc/dtmc.hpp"
#include "llmmc/error.hpp"
#include "llmmc/pctl.hpp"

namespace llmmc {

namespace {

std::int64_t value_of(const MdpSemantics& mdp, const StateVector& s, std::string_view var) {
    return s.values.at(mdp.variable_index(var));
}

std::string enabled_or(const MdpSemantics& mdp, const StateVector& s, const std::string& want,
                       const std::string& otherwise) {
    auto enabled = mdp.enabled_actions(s);
    return std::find(enabled.begin(), enabled.end(), want) != enabled.end() ? want : otherwise;
}

RulePolicy::Rule constant_rule(std::string action) {
    return [action](const MdpSemantics&, const StateVector&) { return action; };
}

/// Picks the enabled action whose successor distribution puts the least mass
/// on "water"; ties go to the earlier action in down, right, left, up.
std::string hole_avoiding(const MdpSemantics& mdp, const StateVector& s) {
    static const std::vector<std::string> preference = {"down", "right", "left", "up"};
    auto enabled = mdp.enabled_actions(s);
    std::string best;
    double best_mass = std::numeric_limits<double>::infinity();
    for (const auto& action : preference) {
        if (std::find(enabled.begin(), enabled.end(), action) == enabled.end()) continue;
        double mass = 0.0;
        for (const auto& succ : mdp.successor_distribution(s, action).support) {
            auto labels = mdp.label_set(succ.state);
            if (std::find(labels.begin(), labels.end(), "water") != labels.end()) mass += succ.probability;
        }
        if (mass < best_mass - 1e-12) {
            best_mass = mass;
            best = action;
        }
    }
    return best;
}

/// Manhattan descent toward the gas station at (1,2), closing the x gap first.
/// At the station the taxi steps up and comes back.
std::string greedy_toward_gas(const MdpSemantics& mdp, const StateVector& s) {
    std::int64_t x = value_of(mdp, s, "x");
    std::int64_t y = value_of(mdp, s, "y");
    if (x < 1) return "right";
    if (x > 1) return "left";
    if (y < 2) return "up";
    if (y > 2) return "down";
    return "up";
}

std::string sell_when_holding(const MdpSemantics& mdp, const StateVector& s) {
    if (value_of(mdp, s, "stocks") > 0) return "sell";
    return enabled_or(mdp, s, "buy", "hold");
}

struct PolicyEntry {
    std::string name;
    RulePolicy::Rule rule;
};

const std::vector<PolicyEntry>& policies_for(std::string_view benchmark) {
    static const std::vector<PolicyEntry> frozen_lake = {
        {"constant-down", constant_rule("down")},
        {"constant-right", constant_rule("right")},
        {"hole-avoiding", hole_avoiding},
    };
    static const std::vector<PolicyEntry> taxi = {
        {"greedy-toward-gas", greedy_toward_gas},
        {"constant-up", constant_rule("up")},
    };
    static const std::vector<PolicyEntry> stock_market = {
        {"hold-only", constant_rule("hold")},
        {"sell-when-holding", sell_when_holding},
    };
    if (benchmark == "frozen_lake") return frozen_lake;
    if (benchmark == "taxi") return taxi;
    if (benchmark == "stock_market") return stock_market;
    throw Error(ErrorKind::usage, "unknown benchmark '" + std::string(benchmark) + "'");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::filesystem::path BenchmarkFixture::policy_table(std::string_view policy) const {
    return policy_dir / (std::string(policy) + ".json");
}

const std::vector<std::string>& benchmark_names() {
    static const std::vector<std::string> names = {"frozen_lake", "taxi", "stock_market"};
    return names;
}

std::filesystem::path benchmark_root() {
    if (const char* env = std::getenv("LLMMC_BENCHMARK_DIR"); env != nullptr && *env != '\0') return env;
    return LLMMC_BENCHMARK_DIR;
}

BenchmarkFixture fixture(std::string_view name) {
    BenchmarkFixture f;
    f.name = std::string(name);
    for (const auto& p : policies_for(name)) f.scripted_policies.push_back(p.name);
    f.directory = benchmark_root() / f.name;
    f.model_path = f.directory / "model.prism";
    f.template_path = f.directory / "template.txt";
    f.var_map_path = f.directory / "var_map.json";
    f.properties_path = f.directory / "properties.props";
    f.policy_dir = f.directory / "policies";
    for (const auto& p : {f.model_path, f.template_path, f.var_map_path, f.properties_path}) {
        if (!std::filesystem::exists(p)) throw Error(ErrorKind::io, "benchmark file missing: " + p.string());
    }
    f.properties = split_properties(read_text(f.properties_path));
    return f;
}

std::vector<std::string> scripted_policies(std::string_view benchmark) {
    std::vector<std::string> names;
    for (const auto& p : policies_for(benchmark)) names.push_back(p.name);
    return names;
}

std::unique_ptr<PolicyOracle> make_scripted_policy(std::string_view benchmark, std::string_view policy) {
    for (const auto& p : policies_for(benchmark)) {
        if (p.name == policy) return std::make_unique<RulePolicy>(p.rule);
    }
    throw Error(ErrorKind::usage,
                "unknown scripted policy '" + std::string(policy) + "' for benchmark '" + std::string(benchmark) + "'");
}

std::map<std::string, std::string> policy_table(const MdpSemantics& mdp, PolicyOracle& policy) {
    InducedDtmc chain = build_induced_dtmc(mdp, policy);
    std::map<std::string, std::string> table;
    for (std::size_t s = 0; s < chain.size(); ++s) {
        if (chain.decisions[s]) table.emplace(mdp.render(chain.states[s]), chain.decisions[s]->action);
    }
    return table;
}

}  // namespace llmmc
