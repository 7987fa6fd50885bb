#include "llmmc/semantics.hpp"

#include <map>

#include "llmmc/error.hpp"

namespace llmmc {

std::size_t StateVectorHash::operator()(const StateVector& s) const noexcept {
    // FNV-1a over the raw values.
    std::uint64_t h = 1469598103934665603ULL;
    for (std::int64_t v : s.values) {
        auto u = static_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            h ^= (u >> (8 * i)) & 0xFF;
            h *= 1099511628211ULL;
        }
    }
    return static_cast<std::size_t>(h);
}

MdpSemantics::MdpSemantics(SymbolicModel model) : model_(resolve_constants(model, {})) {
    std::map<std::string, Value> no_constants;
    for (std::size_t i = 0; i < model_.variables.size(); ++i) {
        const VariableDecl& v = model_.variables[i];
        variable_names_.push_back(v.name);
        index_.emplace(v.name, i);
        auto as_int = [&](const Expr& e, const char* what) {
            std::optional<Value> value = try_evaluate_constant(e, no_constants);
            if (!value) throw Error(ErrorKind::invalid_model, std::string(what) + " of '" + v.name + "' is not constant");
            if (value->is_bool()) return static_cast<std::int64_t>(value->as_bool() ? 1 : 0);
            return value->as_integer();
        };
        lower_.push_back(as_int(v.lower, "lower bound"));
        upper_.push_back(as_int(v.upper, "upper bound"));
        init_.push_back(v.init ? as_int(*v.init, "initial value") : lower_.back());
        if (lower_.back() > upper_.back()) {
            throw Error(ErrorKind::invalid_model, "variable '" + v.name + "' has an empty range");
        }
        if (init_.back() < lower_.back() || init_.back() > upper_.back()) {
            throw Error(ErrorKind::bound_violation, "initial value of '" + v.name + "' outside its range");
        }
    }
    actions_ = model_.actions();
    for (const auto& l : model_.labels) label_names_.push_back(l.name);
}

std::size_t MdpSemantics::variable_index(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw Error(ErrorKind::unknown_identifier, "unknown variable '" + std::string(name) + "'");
    return it->second;
}

StateVector MdpSemantics::initial_state() const { return StateVector{init_}; }

bool MdpSemantics::in_bounds(const StateVector& s) const {
    if (s.values.size() != lower_.size()) return false;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (s.values[i] < lower_[i] || s.values[i] > upper_[i]) return false;
    }
    return true;
}

ValueLookup MdpSemantics::lookup_for(const StateVector& s) const {
    return [this, &s](const std::string& name) -> std::optional<Value> {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        std::int64_t raw = s.values[it->second];
        if (model_.variables[it->second].boolean) return Value(raw != 0);
        return Value(raw);
    };
}

std::vector<std::string> MdpSemantics::enabled_actions(const StateVector& s) const {
    ValueLookup lookup = lookup_for(s);
    std::vector<bool> enabled(actions_.size(), false);
    for (const auto& c : model_.commands) {
        if (!evaluate(c.guard, lookup).as_bool()) continue;
        for (std::size_t i = 0; i < actions_.size(); ++i) {
            if (actions_[i] == c.action) enabled[i] = true;
        }
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < actions_.size(); ++i) {
        if (enabled[i]) out.push_back(actions_[i]);
    }
    return out;
}

Distribution MdpSemantics::successor_distribution(const StateVector& s, std::string_view action) const {
    ValueLookup lookup = lookup_for(s);
    const Command* chosen = nullptr;
    for (const auto& c : model_.commands) {
        if (c.action != action || !evaluate(c.guard, lookup).as_bool()) continue;
        if (chosen) {
            throw Error(ErrorKind::nondeterminism,
                        "two commands for action '" + std::string(action) + "' are enabled in state " + render(s));
        }
        chosen = &c;
    }
    if (!chosen) {
        throw Error(ErrorKind::invalid_model,
                    "action '" + std::string(action) + "' is not enabled in state " + render(s));
    }

    std::map<StateVector, Rational> merged;
    Rational total(0);
    for (const auto& b : chosen->branches) {
        Rational p = evaluate(b.probability, lookup).as_number();
        if (p < Rational(0)) {
            throw Error(ErrorKind::evaluation, "negative probability " + p.to_string() + " for action '" +
                                                   std::string(action) + "' in state " + render(s));
        }
        if (p == Rational(0)) continue;
        StateVector target = s;
        for (const auto& a : b.assignments) {
            std::size_t idx = index_.at(a.variable);
            Value v = evaluate(a.value, lookup);
            std::int64_t raw = model_.variables[idx].boolean ? (v.as_bool() ? 1 : 0) : v.as_integer();
            if (raw < lower_[idx] || raw > upper_[idx]) {
                throw Error(ErrorKind::bound_violation,
                            "update sets '" + a.variable + "' to " + std::to_string(raw) + ", outside [" +
                                std::to_string(lower_[idx]) + ".." + std::to_string(upper_[idx]) + "], in state " +
                                render(s) + " under action '" + std::string(action) + "'");
            }
            target.values[idx] = raw;
        }
        total = total + p;
        auto [it, inserted] = merged.emplace(std::move(target), p);
        if (!inserted) it->second = it->second + p;
    }
    double delta = total.to_double() - 1.0;
    if (delta > 1e-9 || delta < -1e-9) {
        throw Error(ErrorKind::evaluation, "probabilities for action '" + std::string(action) + "' in state " +
                                               render(s) + " sum to " + total.to_string());
    }
    Distribution d;
    d.support.reserve(merged.size());
    for (auto& [state, p] : merged) {
        d.support.push_back({state, (p / total).to_double()});
    }
    return d;
}

std::vector<std::string> MdpSemantics::label_set(const StateVector& s) const {
    ValueLookup lookup = lookup_for(s);
    std::vector<std::string> out;
    for (const auto& l : model_.labels) {
        if (evaluate(l.condition, lookup).as_bool()) out.push_back(l.name);
    }
    return out;
}

std::string MdpSemantics::render(const StateVector& s) const {
    std::string out;
    for (std::size_t i = 0; i < s.values.size() && i < variable_names_.size(); ++i) {
        if (i > 0) out += ';';
        out += variable_names_[i] + "=" + std::to_string(s.values[i]);
    }
    return out;
}

}  // namespace llmmc
