#include "llmmc/verifier.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "llmmc/benchmarks.hpp"
#include "llmmc/model.hpp"
#include "llmmc/pctl.hpp"

namespace llmmc {

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::timeout:
        case ErrorKind::state_limit: return exit_timeout;
        case ErrorKind::oracle: return exit_oracle_error;
        default: return exit_input_error;
    }
}

namespace {

std::string status_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::timeout: return "timeout";
        case ErrorKind::state_limit: return "state_limit";
        case ErrorKind::oracle: return "oracle_error";
        default: return "input_error";
    }
}

template <typename T>
nlohmann::ordered_json optional_json(const std::optional<T>& v) {
    if (!v) return nullptr;
    if constexpr (std::is_same_v<T, std::filesystem::path>) {
        return v->string();
    } else {
        return *v;
    }
}

std::string read_text(const std::filesystem::path& path, const std::string& what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read " + what + " " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
}

void require_declared(const MdpSemantics& mdp, const std::string& action, const std::string& flag) {
    const auto& actions = mdp.actions();
    if (std::find(actions.begin(), actions.end(), action) == actions.end()) {
        throw Error(ErrorKind::usage, flag + " '" + action + "' is not an action of the model");
    }
}

std::unique_ptr<PolicyOracle> make_oracle(const RunConfig& config, const MdpSemantics& mdp) {
    const OracleConfig& oc = config.oracle;
    if (oc.default_action) require_declared(mdp, *oc.default_action, "--default-action");
    switch (oc.kind) {
        case OracleKind::ollama: {
            if (oc.model_name.empty()) throw Error(ErrorKind::usage, "--llm is required with --oracle ollama");
            if (!config.template_path) throw Error(ErrorKind::usage, "--template is required with --oracle ollama");
            PromptTemplate prompt = PromptTemplate::load(*config.template_path);
            VarMap var_map = config.var_map_path ? load_var_map(*config.var_map_path) : VarMap{};
            // Fails on placeholders that name no variable before any request is sent.
            (void)encode_state(prompt, mdp, mdp.initial_state(), var_map);
            auto cache = oc.cache_path ? std::make_shared<ResponseCache>(*oc.cache_path)
                                       : std::make_shared<ResponseCache>();
            auto client = std::make_shared<OllamaClient>(oc, std::move(cache));
            return std::make_unique<LlmPolicy>(std::move(client), std::move(prompt), std::move(var_map),
                                               oc.default_action);
        }
        case OracleKind::scripted: {
            if (!config.scripted_policy) {
                throw Error(ErrorKind::usage, "--scripted-policy is required with --oracle scripted");
            }
            const std::string& spec = *config.scripted_policy;
            if (std::filesystem::exists(spec)) {
                return std::make_unique<TablePolicy>(TablePolicy::load(spec, oc.default_action));
            }
            auto colon = spec.find(':');
            if (colon == std::string::npos) {
                throw Error(ErrorKind::io, "scripted policy '" + spec +
                                               "' is neither a readable file nor of the form <benchmark>:<policy>");
            }
            return make_scripted_policy(spec.substr(0, colon), spec.substr(colon + 1));
        }
        case OracleKind::constant: {
            if (!config.constant_action) {
                throw Error(ErrorKind::usage, "--constant-action is required with --oracle constant");
            }
            require_declared(mdp, *config.constant_action, "--constant-action");
            return std::make_unique<ConstantPolicy>(*config.constant_action, oc.default_action);
        }
    }
    throw Error(ErrorKind::usage, "unsupported oracle kind");
}

std::vector<std::string> property_texts(const RunConfig& config) {
    if (config.property_text && config.property_path) {
        throw Error(ErrorKind::usage, "give either --prop or --prop-file, not both");
    }
    if (config.property_text) return {*config.property_text};
    if (!config.property_path) throw Error(ErrorKind::usage, "a property is required (--prop or --prop-file)");
    auto texts = split_properties(read_text(*config.property_path, "property file"));
    if (texts.empty()) throw Error(ErrorKind::usage, "no property in " + config.property_path->string());
    return texts;
}

VerificationReport run_pipeline(const RunConfig& config, bool with_property) {
    const Clock::time_point start = Clock::now();
    const Clock::time_point deadline =
        start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(config.timeout_s));
    VerificationReport r;
    r.config = config;
    try {
        std::vector<std::string> texts;
        std::vector<StateFormula> formulas;
        if (with_property) {
            texts = property_texts(config);
            for (const auto& t : texts) formulas.push_back(parse_property(t));
        }

        SymbolicModel model = load_model(config.model_path);
        std::map<std::string, Value> overrides;
        for (const auto& text : config.constant_overrides) {
            auto [name, value] = parse_constant_override(text);
            if (!overrides.emplace(name, value).second) {
                throw Error(ErrorKind::usage, "constant '" + name + "' overridden twice");
            }
        }
        SymbolicModel resolved = resolve_constants(model, overrides);
        std::vector<Diagnostic> diagnostics = validate_model(resolved);
        if (!diagnostics.empty()) {
            for (const auto& d : diagnostics) r.diagnostics.push_back({"validation." + d.code, d.message});
            throw Error(ErrorKind::invalid_model,
                        "model failed validation with " + std::to_string(diagnostics.size()) + " diagnostic(s)");
        }
        MdpSemantics mdp(std::move(resolved));
        for (const auto& f : formulas) {
            for (const auto& ap : atomic_propositions(f)) {
                const auto& names = mdp.label_names();
                if (ap != "init" && std::find(names.begin(), names.end(), ap) == names.end()) {
                    throw Error(ErrorKind::unknown_label, "property refers to unknown label \"" + ap + "\"");
                }
            }
        }
        std::unique_ptr<PolicyOracle> oracle = make_oracle(config, mdp);

        BuildLimits limits;
        limits.max_states = config.max_states;
        limits.wall_clock_budget_s = config.timeout_s;
        limits.deadline = deadline;
        limits.strict_faulty = config.strict_faulty;
        limits.prefetch_workers = config.prefetch_workers;
        InducedDtmc chain;
        try {
            chain = build_induced_dtmc(mdp, *oracle, limits);
        } catch (const BuildAborted& e) {
            r.build = e.stats();
            throw;
        }
        r.build = chain.stats;
        r.build_complete = true;

        if (config.export_tra || config.export_lab) {
            if (config.export_tra) write_text(*config.export_tra, transition_file_text(chain));
            if (config.export_lab) write_text(*config.export_lab, label_file_text(chain));
        }
        if (config.decision_log_path) write_text(*config.decision_log_path, decision_log(chain));

        SolverOptions opts;
        opts.deadline = deadline;
        opts.prefer_direct = config.direct_solve;
        opts.cross_check = config.cross_check;
        const Clock::time_point check_start = Clock::now();
        bool violated = false;
        for (std::size_t i = 0; i < formulas.size(); ++i) {
            const Clock::time_point t0 = Clock::now();
            PropertyOutcome outcome{texts[i], check(chain, formulas[i], opts), 0.0};
            outcome.check_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
            if (outcome.result.satisfied == false) violated = true;
            r.properties.push_back(std::move(outcome));
        }
        r.check_time_s = std::chrono::duration<double>(Clock::now() - check_start).count();
        if (violated) {
            r.status = "violated";
            r.exit_code = exit_violated;
        }
    } catch (const Error& e) {
        r.status = status_for(e.kind());
        r.exit_code = exit_code_for(e.kind());
        r.diagnostics.push_back({std::string(to_string(e.kind())), e.what()});
        r.properties.clear();
        if (e.kind() == ErrorKind::timeout) {
            r.timed_out = true;
            if (r.build) r.build->timed_out = true;
        }
    } catch (const std::exception& e) {
        r.status = "input_error";
        r.exit_code = exit_input_error;
        r.diagnostics.push_back({"internal", e.what()});
        r.properties.clear();
    }
    r.total_time_s = std::chrono::duration<double>(Clock::now() - start).count();

    if (config.report_path) {
        try {
            write_text(*config.report_path, to_json(r).dump(2) + "\n");
        } catch (const Error& e) {
            r.diagnostics.push_back({std::string(to_string(e.kind())), e.what()});
            if (r.exit_code == exit_ok || r.exit_code == exit_violated) {
                r.status = "input_error";
                r.exit_code = exit_input_error;
            }
        }
    }
    return r;
}

nlohmann::ordered_json outcome_json(const PropertyOutcome& o) {
    nlohmann::ordered_json j;
    j["property"] = o.property;
    j["result_value"] = o.result.value;
    if (o.result.satisfied) j["satisfied"] = *o.result.satisfied;
    j["boundary"] = o.result.boundary;
    j["method"] = std::string(to_string(o.result.method));
    j["iterations"] = o.result.iterations;
    j["residual"] = o.result.residual;
    if (o.result.cross_check_deviation) j["cross_check_deviation"] = *o.result.cross_check_deviation;
    j["check_time_s"] = o.check_time_s;
    return j;
}

}  // namespace

nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json oracle;
    oracle["kind"] = std::string(to_string(c.oracle.kind));
    oracle["endpoint"] = c.oracle.endpoint;
    oracle["llm"] = c.oracle.model_name;
    oracle["seed"] = c.oracle.seed;
    oracle["temperature"] = c.oracle.temperature;
    oracle["max_output_tokens"] = c.oracle.max_output_tokens;
    oracle["default_action"] = optional_json(c.oracle.default_action);
    oracle["cache"] = optional_json(c.oracle.cache_path);
    oracle["request_timeout_s"] = c.oracle.request_timeout_s;

    nlohmann::ordered_json j;
    j["model"] = c.model_path.string();
    j["constants"] = c.constant_overrides;
    j["property"] = optional_json(c.property_text);
    j["property_file"] = optional_json(c.property_path);
    j["oracle"] = std::move(oracle);
    j["strict_faulty"] = c.strict_faulty;
    j["template"] = optional_json(c.template_path);
    j["var_map"] = optional_json(c.var_map_path);
    j["scripted_policy"] = optional_json(c.scripted_policy);
    j["constant_action"] = optional_json(c.constant_action);
    j["max_states"] = c.max_states;
    j["timeout_s"] = c.timeout_s;
    j["prefetch"] = c.prefetch_workers;
    j["direct_solve"] = c.direct_solve;
    j["cross_check"] = c.cross_check;
    j["export_tra"] = optional_json(c.export_tra);
    j["export_lab"] = optional_json(c.export_lab);
    j["report"] = optional_json(c.report_path);
    j["decision_log"] = optional_json(c.decision_log_path);
    return j;
}

nlohmann::ordered_json to_json(const VerificationReport& r) {
    nlohmann::ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["tool_version"] = LLMMC_VERSION;
    j["status"] = r.status;
    j["exit_code"] = r.exit_code;
    j["timed_out"] = r.timed_out;
    if (!r.properties.empty()) {
        nlohmann::ordered_json first = outcome_json(r.properties.front());
        for (auto& [key, value] : first.items()) {
            if (key != "check_time_s") j[key] = value;
        }
    }
    if (r.build) {
        if (r.build_complete) {
            j["num_states"] = r.build->num_states;
            j["num_transitions"] = r.build->num_transitions;
            j["num_transitions_without_self_loops"] = r.build->num_transitions_without_self_loops();
            j["num_terminal_self_loops"] = r.build->num_terminal_self_loops;
        } else {
            j["states_explored"] = r.build->num_states;
        }
        j["faulty_actions"] = r.build->faulty_actions;
        j["llm_calls"] = r.build->llm_calls;
        j["cache_hits"] = r.build->cache_hits;
        j["build_time_s"] = r.build->build_time_s;
    }
    j["check_time_s"] = r.check_time_s;
    j["total_time_s"] = r.total_time_s;
    nlohmann::ordered_json props = nlohmann::ordered_json::array();
    for (const auto& o : r.properties) props.push_back(outcome_json(o));
    j["properties"] = std::move(props);
    nlohmann::ordered_json diags = nlohmann::ordered_json::array();
    for (const auto& d : r.diagnostics) diags.push_back({{"kind", d.kind}, {"message", d.message}});
    j["diagnostics"] = std::move(diags);
    j["config"] = to_json(r.config);
    return j;
}

VerificationReport run_verify(const RunConfig& config) { return run_pipeline(config, true); }

VerificationReport run_build_only(const RunConfig& config) { return run_pipeline(config, false); }

std::string render_report_table(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    if (ec) throw Error(ErrorKind::io, "cannot list " + dir.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());

    using Row = std::vector<std::string>;
    std::vector<Row> rows = {{"Report", "Property", "Result", "Policy", "States", "Transitions", "Time (s)", "Faulty"}};
    auto number = [](const nlohmann::json& j, const char* key, const char* fmt) -> std::string {
        if (!j.contains(key) || !j[key].is_number()) return "-";
        char buf[64];
        std::snprintf(buf, sizeof buf, fmt, j[key].get<double>());
        return buf;
    };
    for (const auto& path : files) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text(path, "report"));
        } catch (const nlohmann::json::exception&) {
            continue;  // not a report
        }
        if (!j.is_object() || !j.contains("schema_version")) continue;
        const bool to = j.value("timed_out", false);
        const auto& cfg = j.contains("config") ? j["config"] : nlohmann::json::object();
        std::string policy = "-";
        if (cfg.contains("oracle")) {
            std::string kind = cfg["oracle"].value("kind", "");
            if (kind == "ollama") {
                policy = cfg["oracle"].value("llm", "");
            } else if (kind == "scripted" && cfg["scripted_policy"].is_string()) {
                policy = cfg["scripted_policy"].get<std::string>();
            } else if (kind == "constant" && cfg["constant_action"].is_string()) {
                policy = "constant:" + cfg["constant_action"].get<std::string>();
            }
        }
        std::string result = to ? "TO" : number(j, "result_value", "%.4g");
        if (!to && result == "-") result = j.value("status", "-");
        double time = j.value("build_time_s", 0.0) + j.value("check_time_s", 0.0);
        char time_buf[32];
        std::snprintf(time_buf, sizeof time_buf, "%.3g", time);
        rows.push_back({path.stem().string(), j.value("property", std::string("-")), result, policy,
                        to ? "TO" : number(j, "num_states", "%.0f"), to ? "TO" : number(j, "num_transitions", "%.0f"),
                        to ? "TO" : std::string(time_buf), to ? "TO" : number(j, "faulty_actions", "%.0f")});
    }
    std::vector<std::size_t> width(rows.front().size(), 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::string out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
            out += rows[i][c];
            if (c + 1 < rows[i].size()) out += std::string(width[c] - rows[i][c].size() + 2, ' ');
        }
        out += "\n";
        if (i == 0) {
            std::size_t total = 0;
            for (auto w : width) total += w + 2;
            out += std::string(total - 2, '-') + "\n";
        }
    }
    return out;
}

}  // namespace llmmc
