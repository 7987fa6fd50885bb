#include "llmmc/model.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "lexer.hpp"
#include "llmmc/error.hpp"

namespace llmmc {

using detail::Token;
using detail::TokenKind;
using detail::TokenStream;

std::vector<std::string> SymbolicModel::actions() const {
    std::vector<std::string> out;
    for (const auto& c : commands) {
        if (std::find(out.begin(), out.end(), c.action) == out.end()) out.push_back(c.action);
    }
    return out;
}

const VariableDecl* SymbolicModel::find_variable(std::string_view name) const {
    for (const auto& v : variables) {
        if (v.name == name) return &v;
    }
    return nullptr;
}

const ConstantDef* SymbolicModel::find_constant(std::string_view name) const {
    for (const auto& c : constants) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

namespace {

// Scope an expression must resolve in.
enum class Scope { earlier_constants, constants, constants_and_variables };

struct PendingCheck {
    Expr expr;
    SourceLocation where;
    Scope scope;
    std::size_t constants_visible;  // for earlier_constants
};

class ModelParser {
public:
    explicit ModelParser(std::string_view text) : ts_(text, detail::tokenize(text)) {}

    SymbolicModel parse() {
        parse_header();
        bool have_module = false;
        while (!ts_.at_end()) {
            const Token& t = ts_.peek();
            if (ts_.is_keyword("const")) {
                parse_constant();
            } else if (ts_.is_keyword("module")) {
                if (have_module) {
                    ts_.fail_at(t, ErrorKind::syntax, "only a single module is supported");
                }
                parse_module();
                have_module = true;
            } else if (ts_.is_keyword("label")) {
                parse_label();
            } else if (ts_.is_keyword("rewards")) {
                parse_rewards();
            } else if (ts_.is_keyword("formula")) {
                ts_.fail_at(t, ErrorKind::syntax, "formula definitions are not supported");
            } else if (ts_.is_keyword("init")) {
                ts_.fail_at(t, ErrorKind::syntax, "init...endinit blocks are not supported");
            } else if (ts_.is_keyword("global")) {
                ts_.fail_at(t, ErrorKind::syntax, "global variables are not supported");
            } else {
                ts_.fail("'const', 'module', 'label' or 'rewards'");
            }
        }
        if (!have_module) {
            ts_.fail_at(ts_.peek(), ErrorKind::syntax, "model declares no module");
        }
        check_identifiers();
        check_initial_values();
        return std::move(model_);
    }

private:
    void parse_header() {
        const Token& t = ts_.peek();
        if (ts_.accept_keyword("mdp") || ts_.accept_keyword("nondeterministic")) return;
        if (t.kind == TokenKind::identifier &&
            (t.text == "dtmc" || t.text == "ctmc" || t.text == "pta" || t.text == "probabilistic" ||
             t.text == "stochastic")) {
            ts_.fail_at(t, ErrorKind::syntax, "only mdp models are supported, found '" + t.text + "'");
        }
        ts_.fail("model type 'mdp'");
    }

    void declare(const Token& at, const std::string& name) {
        if (!names_.insert(name).second) {
            ts_.fail_at(at, ErrorKind::duplicate_identifier, "duplicate identifier '" + name + "'");
        }
    }

    void parse_constant() {
        ts_.expect_keyword("const");
        ConstantDef c;
        if (ts_.accept_keyword("int")) {
            c.type = ValueType::integer;
        } else if (ts_.accept_keyword("double")) {
            c.type = ValueType::rational;
        } else if (ts_.accept_keyword("bool")) {
            c.type = ValueType::boolean;
        }
        const Token& name_token = ts_.peek();
        c.name = ts_.expect_identifier("a constant name");
        declare(name_token, c.name);
        if (ts_.accept_symbol("=")) {
            SourceLocation where = ts_.peek().where;
            Expr value = detail::parse_expression(ts_);
            pending_.push_back({value, where, Scope::earlier_constants, model_.constants.size()});
            c.value = value;
        }
        ts_.expect_symbol(";");
        model_.constants.push_back(std::move(c));
    }

    void parse_module() {
        ts_.expect_keyword("module");
        model_.module_name = ts_.expect_identifier("a module name");
        while (ts_.peek().kind == TokenKind::identifier && !ts_.is_keyword("endmodule")) {
            parse_variable();
        }
        while (ts_.is_symbol("[")) {
            parse_command();
        }
        if (!ts_.is_keyword("endmodule")) {
            ts_.fail("a variable declaration, a command or 'endmodule'");
        }
        ts_.next();
    }

    void parse_variable() {
        const Token& name_token = ts_.peek();
        VariableDecl v;
        v.name = ts_.expect_identifier("a variable name");
        declare(name_token, v.name);
        ts_.expect_symbol(":");
        if (ts_.accept_keyword("bool")) {
            v.boolean = true;
            v.lower = Expr::number(Rational(0), true);
            v.upper = Expr::number(Rational(1), true);
        } else {
            ts_.expect_symbol("[");
            SourceLocation lo_at = ts_.peek().where;
            v.lower = detail::parse_expression(ts_);
            ts_.expect_symbol("..");
            SourceLocation hi_at = ts_.peek().where;
            v.upper = detail::parse_expression(ts_);
            ts_.expect_symbol("]");
            pending_.push_back({v.lower, lo_at, Scope::constants, 0});
            pending_.push_back({v.upper, hi_at, Scope::constants, 0});
        }
        if (ts_.accept_keyword("init")) {
            SourceLocation init_at = ts_.peek().where;
            v.init = detail::parse_expression(ts_);
            pending_.push_back({*v.init, init_at, Scope::constants, 0});
            init_locations_[v.name] = init_at;
        } else {
            init_locations_[v.name] = name_token.where;
        }
        ts_.expect_symbol(";");
        model_.variables.push_back(std::move(v));
    }

    void parse_command() {
        const Token& open = ts_.expect_symbol("[");
        if (ts_.is_symbol("]")) {
            ts_.fail_at(open, ErrorKind::syntax, "unlabeled commands are not supported; every command needs an action label");
        }
        Command c;
        c.action = ts_.expect_identifier("an action label");
        ts_.expect_symbol("]");
        SourceLocation guard_at = ts_.peek().where;
        c.guard = detail::parse_expression(ts_);
        pending_.push_back({c.guard, guard_at, Scope::constants_and_variables, 0});
        ts_.expect_symbol("->");
        do {
            c.branches.push_back(parse_branch());
        } while (ts_.accept_symbol("+"));
        ts_.expect_symbol(";");
        model_.commands.push_back(std::move(c));
    }

    bool at_assignment_list() const {
        return (ts_.is_symbol("(") && ts_.peek(1).kind == TokenKind::identifier && ts_.is_symbol("'", 2)) ||
               (ts_.is_keyword("true") && (ts_.is_symbol(";", 1) || ts_.is_symbol("+", 1)));
    }

    Branch parse_branch() {
        Branch b;
        if (at_assignment_list()) {
            b.probability = Expr::number(Rational(1), true);
        } else {
            SourceLocation prob_at = ts_.peek().where;
            b.probability = detail::parse_expression(ts_);
            pending_.push_back({b.probability, prob_at, Scope::constants_and_variables, 0});
            ts_.expect_symbol(":");
        }
        if (ts_.accept_keyword("true")) return b;
        std::set<std::string> targets;
        do {
            ts_.expect_symbol("(");
            const Token& target_token = ts_.peek();
            Assignment a;
            a.variable = ts_.expect_identifier("a variable name");
            ts_.expect_symbol("'");
            ts_.expect_symbol("=");
            SourceLocation value_at = ts_.peek().where;
            a.value = detail::parse_expression(ts_);
            ts_.expect_symbol(")");
            if (!targets.insert(a.variable).second) {
                ts_.fail_at(target_token, ErrorKind::duplicate_identifier,
                            "variable '" + a.variable + "' assigned twice in one update");
            }
            assignment_targets_.push_back({a.variable, target_token.where});
            pending_.push_back({a.value, value_at, Scope::constants_and_variables, 0});
            b.assignments.push_back(std::move(a));
        } while (ts_.accept_symbol("&"));
        return b;
    }

    void parse_label() {
        ts_.expect_keyword("label");
        const Token& name_token = ts_.peek();
        LabelDef l;
        l.name = ts_.expect_string("a quoted label name");
        if (l.name.empty()) ts_.fail_at(name_token, ErrorKind::syntax, "label name must not be empty");
        if (!label_names_.insert(l.name).second) {
            ts_.fail_at(name_token, ErrorKind::duplicate_identifier, "duplicate label \"" + l.name + "\"");
        }
        ts_.expect_symbol("=");
        SourceLocation cond_at = ts_.peek().where;
        l.condition = detail::parse_expression(ts_);
        pending_.push_back({l.condition, cond_at, Scope::constants_and_variables, 0});
        ts_.expect_symbol(";");
        model_.labels.push_back(std::move(l));
    }

    void parse_rewards() {
        const Token& start = ts_.next();
        RewardDef r;
        std::size_t body_begin = start.offset + start.length;
        if (ts_.peek().kind == TokenKind::string) {
            const Token& name_token = ts_.next();
            r.name = name_token.text;
            body_begin = name_token.offset + name_token.length;
        }
        while (!ts_.is_keyword("endrewards")) {
            if (ts_.at_end()) ts_.fail("'endrewards'");
            ts_.next();
        }
        const Token& end = ts_.next();
        std::string_view body = ts_.source().substr(body_begin, end.offset - body_begin);
        auto first = body.find_first_not_of(" \t\r\n");
        auto last = body.find_last_not_of(" \t\r\n");
        r.body = first == std::string_view::npos ? std::string() : std::string(body.substr(first, last - first + 1));
        model_.rewards.push_back(std::move(r));
    }

    void check_identifiers() const {
        std::set<std::string> constants;
        std::set<std::string> variables;
        for (const auto& c : model_.constants) constants.insert(c.name);
        for (const auto& v : model_.variables) variables.insert(v.name);
        for (const auto& check : pending_) {
            std::set<std::string> used;
            collect_identifiers(check.expr, used);
            for (const auto& name : used) {
                bool ok = false;
                switch (check.scope) {
                    case Scope::earlier_constants:
                        for (std::size_t i = 0; i < check.constants_visible; ++i) {
                            if (model_.constants[i].name == name) ok = true;
                        }
                        break;
                    case Scope::constants: ok = constants.contains(name); break;
                    case Scope::constants_and_variables: ok = constants.contains(name) || variables.contains(name); break;
                }
                if (!ok) {
                    std::string hint = variables.contains(name) ? " (variables are not allowed here)" : "";
                    throw Error(ErrorKind::unknown_identifier, "unknown identifier '" + name + "'" + hint, check.where);
                }
            }
        }
        for (const auto& [name, where] : assignment_targets_) {
            if (!variables.contains(name)) {
                throw Error(ErrorKind::unknown_identifier, "assignment to undeclared variable '" + name + "'", where);
            }
        }
    }

    void check_initial_values() const {
        std::map<std::string, Value> known;
        for (const auto& c : model_.constants) {
            if (!c.value) continue;
            try {
                if (auto v = try_evaluate_constant(*c.value, known)) known.emplace(c.name, *v);
            } catch (const Error&) {
                // Reported by validate_model.
            }
        }
        for (const auto& v : model_.variables) {
            if (v.boolean) continue;
            std::optional<Value> lo;
            std::optional<Value> hi;
            std::optional<Value> init;
            try {
                lo = try_evaluate_constant(v.lower, known);
                hi = try_evaluate_constant(v.upper, known);
                init = v.init ? try_evaluate_constant(*v.init, known) : lo;
            } catch (const Error&) {
                continue;
            }
            if (!lo || !hi || !init || !lo->is_number() || !hi->is_number() || !init->is_number()) continue;
            const Rational& l = lo->as_number();
            const Rational& h = hi->as_number();
            const Rational& i = init->as_number();
            if (i < l || i > h) {
                throw Error(ErrorKind::bound_violation,
                            "initial value " + i.to_string() + " of '" + v.name + "' outside [" + l.to_string() + ".." +
                                h.to_string() + "]",
                            init_locations_.at(v.name));
            }
        }
    }

    TokenStream ts_;
    SymbolicModel model_;
    std::set<std::string> names_;
    std::set<std::string> label_names_;
    std::vector<PendingCheck> pending_;
    std::vector<std::pair<std::string, SourceLocation>> assignment_targets_;
    std::map<std::string, SourceLocation> init_locations_;
};

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    return buf;
}

std::string render_sum(const Rational& sum) {
    return sum.has_finite_decimal() ? sum.to_string() : format_number(sum.to_double());
}

TypeLookup type_lookup(const SymbolicModel& model) {
    return [&model](const std::string& name) -> std::optional<ValueType> {
        if (const VariableDecl* v = model.find_variable(name)) {
            return v->boolean ? ValueType::boolean : ValueType::integer;
        }
        if (const ConstantDef* c = model.find_constant(name)) return c->type;
        return std::nullopt;
    };
}

bool type_compatible(ValueType declared, ValueType actual) {
    if (declared == ValueType::boolean || actual == ValueType::boolean) return declared == actual;
    return declared == ValueType::rational || actual == ValueType::integer;
}

Value coerce_constant(const ConstantDef& c, const Value& v) {
    if (c.type == ValueType::boolean) {
        if (!v.is_bool()) {
            throw Error(ErrorKind::type_mismatch, "constant '" + c.name + "' is bool but got " + v.to_string());
        }
        return v;
    }
    if (!v.is_number()) {
        throw Error(ErrorKind::type_mismatch,
                    "constant '" + c.name + "' is " + std::string(to_string(c.type)) + " but got " + v.to_string());
    }
    if (c.type == ValueType::integer && !v.as_number().is_integer()) {
        throw Error(ErrorKind::type_mismatch, "constant '" + c.name + "' is int but got " + v.to_string());
    }
    return v;
}

}  // namespace

SymbolicModel parse_model(std::string_view text) { return ModelParser(text).parse(); }

SymbolicModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read model file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

std::string print_model(const SymbolicModel& model) {
    std::string out = "mdp\n";
    if (!model.constants.empty()) {
        out += '\n';
        for (const auto& c : model.constants) {
            out += "const " + std::string(to_string(c.type)) + " " + c.name;
            if (c.value) out += " = " + c.value->to_string();
            out += ";\n";
        }
    }
    out += "\nmodule " + model.module_name + "\n";
    for (const auto& v : model.variables) {
        out += "  " + v.name + " : ";
        if (v.boolean) {
            out += "bool";
        } else {
            out += "[" + v.lower.to_string() + ".." + v.upper.to_string() + "]";
        }
        if (v.init) out += " init " + v.init->to_string();
        out += ";\n";
    }
    if (!model.variables.empty() && !model.commands.empty()) out += '\n';
    for (const auto& c : model.commands) {
        out += "  [" + c.action + "] " + c.guard.to_string() + " -> ";
        for (std::size_t i = 0; i < c.branches.size(); ++i) {
            const Branch& b = c.branches[i];
            if (i > 0) out += " + ";
            bool implicit = c.branches.size() == 1 && b.probability == Expr::number(Rational(1), true);
            if (!implicit) out += b.probability.to_string() + " : ";
            if (b.assignments.empty()) {
                out += "true";
            }
            for (std::size_t j = 0; j < b.assignments.size(); ++j) {
                if (j > 0) out += " & ";
                out += "(" + b.assignments[j].variable + "' = " + b.assignments[j].value.to_string() + ")";
            }
        }
        out += ";\n";
    }
    out += "endmodule\n";
    if (!model.labels.empty()) {
        out += '\n';
        for (const auto& l : model.labels) {
            out += "label \"" + l.name + "\" = " + l.condition.to_string() + ";\n";
        }
    }
    for (const auto& r : model.rewards) {
        out += "\nrewards";
        if (!r.name.empty()) out += " \"" + r.name + "\"";
        out += "\n";
        if (!r.body.empty()) out += r.body + "\n";
        out += "endrewards\n";
    }
    return out;
}

std::vector<Diagnostic> validate_model(const SymbolicModel& model) {
    std::vector<Diagnostic> diags;
    auto report = [&diags](std::string code, std::string message) {
        diags.push_back({std::move(code), std::move(message)});
    };
    TypeLookup types = type_lookup(model);

    auto check_type = [&](const Expr& e, const std::string& where) -> std::optional<ValueType> {
        try {
            return type_of(e, types);
        } catch (const Error& err) {
            report("type", where + ": " + err.detail());
            return std::nullopt;
        }
    };

    // Constant values that can be computed without overrides.
    std::map<std::string, Value> known;
    for (const auto& c : model.constants) {
        if (!c.value) continue;
        std::string where = "constant '" + c.name + "'";
        if (auto t = check_type(*c.value, where); t && !type_compatible(c.type, *t)) {
            report("type", where + ": declared " + std::string(to_string(c.type)) + " but defined as " +
                               std::string(to_string(*t)));
        }
        try {
            if (auto v = try_evaluate_constant(*c.value, known)) known.emplace(c.name, coerce_constant(c, *v));
        } catch (const Error& err) {
            report("constant", where + ": " + err.detail());
        }
    }

    // Divisors that are statically zero.
    auto check_division = [&](const Expr& e, const std::string& where) {
        for_each_subexpression(e, [&](const Expr& sub) {
            const Expr* divisor = nullptr;
            if (sub.kind() == Expr::Kind::binary && sub.binary_op() == BinaryOp::divide) divisor = &sub.operands()[1];
            if (sub.kind() == Expr::Kind::call && sub.function() == Function::mod) divisor = &sub.operands()[1];
            if (!divisor) return;
            try {
                auto v = try_evaluate_constant(*divisor, known);
                if (v && v->is_number() && v->as_number() == Rational(0)) {
                    report("division_by_zero", where + ": division by zero in '" + sub.to_string() + "'");
                }
            } catch (const Error&) {
            }
        });
    };
    auto try_constant = [&](const Expr& e) -> std::optional<Value> {
        try {
            return try_evaluate_constant(e, known);
        } catch (const Error&) {
            return std::nullopt;
        }
    };

    for (const auto& v : model.variables) {
        std::string where = "variable '" + v.name + "'";
        if (!v.boolean) {
            for (const Expr* bound : {&v.lower, &v.upper}) {
                if (auto t = check_type(*bound, where); t && *t != ValueType::integer) {
                    report("type", where + ": bound '" + bound->to_string() + "' is not an integer");
                }
                check_division(*bound, where);
            }
            auto lo = try_constant(v.lower);
            auto hi = try_constant(v.upper);
            if (lo && hi && lo->is_number() && hi->is_number() && lo->as_number() > hi->as_number()) {
                report("bounds", where + ": empty range [" + lo->to_string() + ".." + hi->to_string() + "]");
            }
        }
        if (v.init) {
            ValueType want = v.boolean ? ValueType::boolean : ValueType::integer;
            if (auto t = check_type(*v.init, where); t && *t != want) {
                report("type", where + ": initial value '" + v.init->to_string() + "' is not " +
                                   std::string(to_string(want)));
            }
            check_division(*v.init, where);
        }
    }

    for (std::size_t i = 0; i < model.commands.size(); ++i) {
        const Command& c = model.commands[i];
        std::string where = "command " + std::to_string(i + 1) + " [" + c.action + "]";
        if (auto t = check_type(c.guard, where); t && *t != ValueType::boolean) {
            report("type", where + ": guard is not boolean");
        }
        check_division(c.guard, where);
        std::optional<Value> guard_value = try_constant(c.guard);
        bool guard_false = guard_value && guard_value->is_bool() && !guard_value->as_bool();

        Rational sum(0);
        bool sum_known = true;
        for (const auto& b : c.branches) {
            if (auto t = check_type(b.probability, where); t && *t == ValueType::boolean) {
                report("type", where + ": probability '" + b.probability.to_string() + "' is boolean");
            }
            check_division(b.probability, where);
            std::optional<Value> p = try_constant(b.probability);
            if (!p || !p->is_number()) {
                sum_known = false;
            } else {
                const Rational& r = p->as_number();
                if (r < Rational(0) || r > Rational(1)) {
                    report("probability_range", where + ": probability " + r.to_string() + " outside [0, 1]");
                }
                try {
                    sum = sum + r;
                } catch (const Error&) {
                    sum_known = false;
                }
            }
            for (const auto& a : b.assignments) {
                const VariableDecl* var = model.find_variable(a.variable);
                if (!var) continue;
                std::string target = where + ": assignment to '" + a.variable + "'";
                if (auto t = check_type(a.value, target)) {
                    bool ok = var->boolean ? *t == ValueType::boolean : *t == ValueType::integer;
                    if (!ok) {
                        report("type", target + " has type " + std::string(to_string(*t)));
                    }
                }
                check_division(a.value, target);
                if (guard_false || var->boolean) continue;
                auto value = try_constant(a.value);
                auto lo = try_constant(var->lower);
                auto hi = try_constant(var->upper);
                if (value && lo && hi && value->is_number() && lo->is_number() && hi->is_number() &&
                    (value->as_number() < lo->as_number() || value->as_number() > hi->as_number())) {
                    report("bounds", target + ": value " + value->to_string() + " outside [" + lo->to_string() + ".." +
                                         hi->to_string() + "]");
                }
            }
        }
        if (sum_known) {
            double delta = sum.to_double() - 1.0;
            if (delta > 1e-9 || delta < -1e-9) {
                report("probability_sum", where + ": probabilities sum to " + render_sum(sum));
            }
        }
    }

    for (const auto& l : model.labels) {
        std::string where = "label \"" + l.name + "\"";
        if (auto t = check_type(l.condition, where); t && *t != ValueType::boolean) {
            report("type", where + ": condition is not boolean");
        }
        check_division(l.condition, where);
    }
    return diags;
}

std::map<std::string, Value> constant_values(const SymbolicModel& model) {
    std::map<std::string, Value> values;
    for (const auto& c : model.constants) {
        if (!c.value) {
            throw Error(ErrorKind::missing_override, "constant '" + c.name + "' has no value; supply --const " + c.name + "=...");
        }
        std::optional<Value> v = try_evaluate_constant(*c.value, values);
        if (!v) {
            throw Error(ErrorKind::unknown_identifier, "constant '" + c.name + "' depends on an undefined constant");
        }
        values.emplace(c.name, coerce_constant(c, *v));
    }
    return values;
}

SymbolicModel resolve_constants(const SymbolicModel& model, const std::map<std::string, Value>& overrides) {
    SymbolicModel out = model;
    for (const auto& [name, value] : overrides) {
        ConstantDef* c = nullptr;
        for (auto& candidate : out.constants) {
            if (candidate.name == name) c = &candidate;
        }
        if (!c) throw Error(ErrorKind::unknown_identifier, "override for undeclared constant '" + name + "'");
        c->value = literal(coerce_constant(*c, value));
    }
    std::map<std::string, Value> values = constant_values(out);
    std::map<std::string, Expr> replacements;
    for (auto& c : out.constants) {
        const Value& v = values.at(c.name);
        Expr lit = v.is_bool() ? Expr::boolean(v.as_bool()) : Expr::number(v.as_number(), c.type == ValueType::integer);
        c.value = lit;
        replacements.emplace(c.name, lit);
    }
    auto subst = [&replacements](Expr& e) { e = substitute(e, replacements); };
    for (auto& v : out.variables) {
        subst(v.lower);
        subst(v.upper);
        if (v.init) subst(*v.init);
    }
    for (auto& c : out.commands) {
        subst(c.guard);
        for (auto& b : c.branches) {
            subst(b.probability);
            for (auto& a : b.assignments) subst(a.value);
        }
    }
    for (auto& l : out.labels) subst(l.condition);
    return out;
}

std::pair<std::string, Value> parse_constant_override(std::string_view text) {
    auto eq = text.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw Error(ErrorKind::usage, "constant override must look like NAME=VALUE, got '" + std::string(text) + "'");
    }
    std::string name(text.substr(0, eq));
    std::string_view raw = text.substr(eq + 1);
    if (raw == "true") return {name, Value(true)};
    if (raw == "false") return {name, Value(false)};
    bool negative = !raw.empty() && raw.front() == '-';
    if (negative) raw.remove_prefix(1);
    std::optional<Rational> r = Rational::parse_decimal(raw);
    if (!r) throw Error(ErrorKind::usage, "cannot parse value of constant '" + name + "'");
    return {name, Value(negative ? -*r : *r)};
}

}  // namespace llmmc
