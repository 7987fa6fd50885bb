// Command-line front end: verify, build, list-benchmarks, export-policy, --table.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "llmmc/benchmarks.hpp"
#include "llmmc/model.hpp"
#include "llmmc/verifier.hpp"

namespace {

using llmmc::RunConfig;

struct CliState {
    RunConfig config;
    std::string model;
    std::string benchmark;
    std::string prop;
    std::string prop_file;
    std::string oracle = "constant";
    std::string endpoint;
    std::string default_action;
    std::string template_path;
    std::string var_map;
    std::string scripted_policy;
    std::string constant_action;
    std::string cache;
    std::string export_tra;
    std::string export_lab;
    std::string report;
    std::string decision_log;
};

void add_run_options(CLI::App* cmd, CliState& st, bool with_property) {
    cmd->add_option("--model", st.model, "PRISM-subset MDP file");
    cmd->add_option("--benchmark", st.benchmark,
                    "Use a shipped fixture for the model, template, variable map and properties");
    cmd->add_option("--const", st.config.constant_overrides, "Constant override NAME=VALUE (repeatable)");
    if (with_property) {
        cmd->add_option("--prop", st.prop, "PCTL property, e.g. 'P=? [ F \"water\" ]'");
        cmd->add_option("--prop-file", st.prop_file, "File with one property per line");
    }
    cmd->add_option("--oracle", st.oracle, "Policy oracle")
        ->check(CLI::IsMember({"ollama", "scripted", "constant"}))
        ->capture_default_str();
    cmd->add_option("--endpoint", st.endpoint, "Ollama base URL (env LLMMC_ENDPOINT)");
    cmd->add_option("--llm", st.config.oracle.model_name, "Ollama model name, e.g. llama3.2:3b");
    cmd->add_option("--seed", st.config.oracle.seed, "LLM sampling seed")->capture_default_str();
    cmd->add_option("--temperature", st.config.oracle.temperature, "LLM sampling temperature")
        ->capture_default_str();
    cmd->add_option("--max-output-tokens", st.config.oracle.max_output_tokens, "num_predict sent to Ollama")
        ->capture_default_str();
    cmd->add_option("--request-timeout-s", st.config.oracle.request_timeout_s, "Per-request HTTP timeout")
        ->capture_default_str();
    cmd->add_option("--default-action", st.default_action, "Fallback action for unparseable LLM output");
    cmd->add_flag("--strict-faulty", st.config.strict_faulty, "Abort on the first faulty action");
    cmd->add_option("--template", st.template_path, "Prompt template with {placeholders}");
    cmd->add_option("--var-map", st.var_map, "JSON map from placeholder to model variable");
    cmd->add_option("--scripted-policy", st.scripted_policy,
                    "JSON state->action table, or <benchmark>:<policy> for a built-in rule");
    cmd->add_option("--constant-action", st.constant_action, "Action used by --oracle constant");
    cmd->add_option("--max-states", st.config.max_states, "Abort beyond this many states (0 = unlimited)")
        ->capture_default_str();
    cmd->add_option("--timeout-s", st.config.timeout_s, "Wall-clock budget for the whole run")
        ->capture_default_str();
    cmd->add_option("--prefetch", st.config.prefetch_workers, "Concurrent oracle queries (0 = sequential)")
        ->capture_default_str();
    cmd->add_option("--cache", st.cache, "JSON-lines response cache (env LLMMC_CACHE)");
    cmd->add_option("--export-tra", st.export_tra, "Write the chain's transitions");
    cmd->add_option("--export-lab", st.export_lab, "Write the chain's labels");
    cmd->add_option("--report", st.report, "Write the JSON report here as well as to stdout");
    cmd->add_option("--decision-log", st.decision_log, "Write one JSON line per decided state");
    if (with_property) {
        cmd->add_flag("--direct-solve", st.config.direct_solve, "Solve unbounded until by dense LU");
        cmd->add_flag("--cross-check", st.config.cross_check, "Also run the dense solver and report the deviation");
    }
}

std::optional<std::filesystem::path> optional_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
}

RunConfig finish_config(CliState& st) {
    RunConfig c = st.config;
    if (!st.benchmark.empty()) {
        llmmc::BenchmarkFixture f = llmmc::fixture(st.benchmark);
        if (st.model.empty()) st.model = f.model_path.string();
        if (st.template_path.empty()) st.template_path = f.template_path.string();
        if (st.var_map.empty()) st.var_map = f.var_map_path.string();
        if (st.prop.empty() && st.prop_file.empty()) st.prop_file = f.properties_path.string();
    }
    if (st.model.empty()) throw llmmc::Error(llmmc::ErrorKind::usage, "--model or --benchmark is required");
    c.model_path = st.model;
    if (!st.prop.empty()) c.property_text = st.prop;
    c.property_path = optional_path(st.prop_file);
    c.oracle.kind = llmmc::oracle_kind_from_string(st.oracle);
    if (st.endpoint.empty()) {
        if (const char* env = std::getenv("LLMMC_ENDPOINT"); env != nullptr && *env != '\0') st.endpoint = env;
    }
    if (!st.endpoint.empty()) c.oracle.endpoint = st.endpoint;
    if (st.cache.empty()) {
        if (const char* env = std::getenv("LLMMC_CACHE"); env != nullptr && *env != '\0') st.cache = env;
    }
    c.oracle.cache_path = optional_path(st.cache);
    if (!st.default_action.empty()) c.oracle.default_action = st.default_action;
    c.template_path = optional_path(st.template_path);
    c.var_map_path = optional_path(st.var_map);
    if (!st.scripted_policy.empty()) c.scripted_policy = st.scripted_policy;
    if (!st.constant_action.empty()) c.constant_action = st.constant_action;
    c.export_tra = optional_path(st.export_tra);
    c.export_lab = optional_path(st.export_lab);
    c.report_path = optional_path(st.report);
    c.decision_log_path = optional_path(st.decision_log);
    return c;
}

/// Report for failures that happen before the pipeline starts (bad flags).
int usage_failure(const CliState& st, const llmmc::Error& e) {
    llmmc::VerificationReport r;
    r.status = "input_error";
    r.exit_code = llmmc::exit_input_error;
    r.diagnostics.push_back({std::string(llmmc::to_string(e.kind())), e.what()});
    r.config = st.config;
    r.config.model_path = st.model;
    std::string text = llmmc::to_json(r).dump(2);
    if (!st.report.empty()) {
        std::ofstream out(st.report);
        out << text << "\n";
    }
    std::cout << text << "\n";
    std::cerr << "error: " << e.what() << "\n";
    return r.exit_code;
}

int run(CliState& st, bool with_property) {
    RunConfig config;
    try {
        config = finish_config(st);
    } catch (const llmmc::Error& e) {
        return usage_failure(st, e);
    }
    llmmc::VerificationReport r = with_property ? llmmc::run_verify(config) : llmmc::run_build_only(config);
    std::cout << llmmc::to_json(r).dump(2) << "\n";
    for (const auto& d : r.diagnostics) std::cerr << d.kind << ": " << d.message << "\n";
    return r.exit_code;
}

int export_policy(const std::string& benchmark, const std::string& policy, const std::string& out, bool all) {
    std::vector<std::string> benchmarks = benchmark.empty() ? llmmc::benchmark_names() : std::vector{benchmark};
    for (const auto& b : benchmarks) {
        llmmc::BenchmarkFixture f = llmmc::fixture(b);
        llmmc::MdpSemantics mdp(llmmc::load_model(f.model_path));
        std::vector<std::string> policies = all || policy.empty() ? f.scripted_policies : std::vector{policy};
        for (const auto& p : policies) {
            auto oracle = llmmc::make_scripted_policy(b, p);
            nlohmann::ordered_json j(llmmc::policy_table(mdp, *oracle));
            std::string text = j.dump(2) + "\n";
            if (!all && !out.empty()) {
                std::ofstream(out) << text;
            } else if (all) {
                std::filesystem::create_directories(f.policy_dir);
                std::ofstream(f.policy_table(p)) << text;
                std::cerr << "wrote " << f.policy_table(p).string() << "\n";
            } else {
                std::cout << text;
            }
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model checking of LLM-driven policies on PRISM-subset MDPs"};
    app.set_version_flag("--version", std::string(LLMMC_VERSION));
    std::string table_dir;
    app.add_option("--table", table_dir, "Render a results table from a directory of JSON reports");

    CliState verify_state;
    CLI::App* verify = app.add_subcommand("verify", "Build the policy-induced chain and check properties");
    add_run_options(verify, verify_state, true);

    CliState build_state;
    CLI::App* build = app.add_subcommand("build", "Build and export the policy-induced chain");
    add_run_options(build, build_state, false);

    CLI::App* list = app.add_subcommand("list-benchmarks", "Print the shipped fixtures and their files");

    std::string ep_benchmark;
    std::string ep_policy;
    std::string ep_out;
    bool ep_all = false;
    CLI::App* ep = app.add_subcommand("export-policy", "Write the state->action table of a built-in policy");
    ep->add_option("--benchmark", ep_benchmark, "Benchmark name");
    ep->add_option("--policy", ep_policy, "Policy name (default: all policies of the benchmark)");
    ep->add_option("--out", ep_out, "Output file for a single policy (default: stdout)");
    ep->add_flag("--write-fixtures", ep_all, "Regenerate the shipped tables in the fixture directories");

    app.require_subcommand(0, 1);
    CLI11_PARSE(app, argc, argv);

    try {
        if (!table_dir.empty()) {
            std::cout << llmmc::render_report_table(table_dir);
            if (app.get_subcommands().empty()) return 0;
        }
        if (verify->parsed()) return run(verify_state, true);
        if (build->parsed()) return run(build_state, false);
        if (list->parsed()) {
            std::cout << "root: " << llmmc::benchmark_root().string() << "\n";
            for (const auto& name : llmmc::benchmark_names()) {
                llmmc::BenchmarkFixture f = llmmc::fixture(name);
                std::cout << name << "\n"
                          << "  model:      " << f.model_path.string() << "\n"
                          << "  template:   " << f.template_path.string() << "\n"
                          << "  var_map:    " << f.var_map_path.string() << "\n"
                          << "  properties: " << f.properties_path.string() << "\n"
                          << "  policies:  ";
                for (const auto& p : f.scripted_policies) std::cout << " " << name << ":" << p;
                std::cout << "\n";
            }
            return 0;
        }
        if (ep->parsed()) return export_policy(ep_benchmark, ep_policy, ep_out, ep_all);
    } catch (const llmmc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return llmmc::exit_code_for(e.kind());
    }
    if (table_dir.empty()) {
        std::cout << app.help();
        return llmmc::exit_input_error;
    }
    return 0;
}
