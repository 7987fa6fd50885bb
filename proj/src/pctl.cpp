#include "llmmc/pctl.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "lexer.hpp"
#include "llmmc/error.hpp"
#include "llmmc/rational.hpp"

namespace llmmc {

using detail::Token;
using detail::TokenKind;
using detail::TokenStream;

std::string_view symbol(Comparison c) {
    switch (c) {
        case Comparison::less: return "<";
        case Comparison::less_equal: return "<=";
        case Comparison::greater: return ">";
        case Comparison::greater_equal: return ">=";
    }
    return "?";
}

bool compare(Comparison c, double value, double threshold) {
    switch (c) {
        case Comparison::less: return value < threshold;
        case Comparison::less_equal: return value <= threshold;
        case Comparison::greater: return value > threshold;
        case Comparison::greater_equal: return value >= threshold;
    }
    return false;
}

StateFormula StateFormula::constant(bool v) {
    StateFormula f;
    f.kind = Kind::constant;
    f.value = v;
    return f;
}

StateFormula StateFormula::atomic(std::string name) {
    StateFormula f;
    f.kind = Kind::atomic;
    f.label = std::move(name);
    return f;
}

StateFormula StateFormula::negation(StateFormula inner) {
    StateFormula f;
    f.kind = Kind::negation;
    f.operands.push_back(std::move(inner));
    return f;
}

StateFormula StateFormula::conjunction(StateFormula a, StateFormula b) {
    StateFormula f;
    f.kind = Kind::conjunction;
    f.operands = {std::move(a), std::move(b)};
    return f;
}

StateFormula StateFormula::disjunction(StateFormula a, StateFormula b) {
    StateFormula f;
    f.kind = Kind::disjunction;
    f.operands = {std::move(a), std::move(b)};
    return f;
}

StateFormula StateFormula::probability(std::optional<ProbabilityBound> bound, PathFormula path) {
    StateFormula f;
    f.kind = Kind::probability;
    f.bound = bound;
    f.path = std::make_shared<const PathFormula>(std::move(path));
    return f;
}

bool operator==(const StateFormula& a, const StateFormula& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case StateFormula::Kind::constant: return a.value == b.value;
        case StateFormula::Kind::atomic: return a.label == b.label;
        case StateFormula::Kind::negation:
        case StateFormula::Kind::conjunction:
        case StateFormula::Kind::disjunction: return a.operands == b.operands;
        case StateFormula::Kind::probability:
            return a.bound == b.bound && a.path && b.path && *a.path == *b.path;
    }
    return false;
}

namespace {

std::string format_threshold(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int strength(const StateFormula& f) {
    switch (f.kind) {
        case StateFormula::Kind::disjunction: return 1;
        case StateFormula::Kind::conjunction: return 2;
        case StateFormula::Kind::negation: return 3;
        default: return 4;
    }
}

std::string wrap(const StateFormula& f, int min_strength) {
    std::string inner = f.to_string();
    return strength(f) < min_strength ? "(" + inner + ")" : inner;
}

}  // namespace

std::string StateFormula::to_string() const {
    switch (kind) {
        case Kind::constant: return value ? "true" : "false";
        case Kind::atomic: return "\"" + label + "\"";
        case Kind::negation: return "!" + wrap(operands[0], 3);
        case Kind::conjunction: return wrap(operands[0], 2) + " & " + wrap(operands[1], 3);
        case Kind::disjunction: return wrap(operands[0], 1) + " | " + wrap(operands[1], 2);
        case Kind::probability: {
            std::string head = "P";
            head += bound ? std::string(symbol(bound->relation)) + format_threshold(bound->threshold) : "=?";
            return head + " [ " + path->to_string() + " ]";
        }
    }
    return "?";
}

std::string PathFormula::to_string() const {
    auto bound_text = [this] { return step_bound ? "<=" + std::to_string(*step_bound) : std::string(); };
    auto operand = [](const StateFormula& f) {
        return f.kind == StateFormula::Kind::probability || strength(f) >= 3 ? f.to_string() : "(" + f.to_string() + ")";
    };
    switch (kind) {
        case Kind::next: return "X " + operand(operands[0]);
        case Kind::eventually: return "F" + bound_text() + " " + operand(operands[0]);
        case Kind::globally: return "G" + bound_text() + " " + operand(operands[0]);
        case Kind::until: return operand(operands[0]) + " U" + bound_text() + " " + operand(operands[1]);
    }
    return "?";
}

namespace {

class PropertyParser {
public:
    explicit PropertyParser(std::string_view text) : ts_(text, detail::tokenize(text)) {}

    StateFormula parse() {
        StateFormula f = parse_or(true);
        if (!ts_.at_end()) ts_.fail("end of property");
        return f;
    }

private:
    StateFormula parse_or(bool top) {
        StateFormula lhs = parse_and(top);
        while (ts_.accept_symbol("|")) lhs = StateFormula::disjunction(std::move(lhs), parse_and(false));
        return lhs;
    }

    StateFormula parse_and(bool top) {
        StateFormula lhs = parse_not(top);
        while (ts_.accept_symbol("&")) lhs = StateFormula::conjunction(std::move(lhs), parse_not(false));
        return lhs;
    }

    StateFormula parse_not(bool top) {
        TokenStream::DepthGuard guard(ts_);
        if (ts_.accept_symbol("!")) return StateFormula::negation(parse_not(false));
        return parse_atom(top);
    }

    StateFormula parse_atom(bool top) {
        TokenStream::DepthGuard guard(ts_);
        const Token& t = ts_.peek();
        if (t.kind == TokenKind::string) {
            std::string name = ts_.next().text;
            if (name.empty()) ts_.fail_at(t, ErrorKind::syntax, "empty atomic proposition");
            return StateFormula::atomic(std::move(name));
        }
        if (ts_.accept_symbol("(")) {
            StateFormula inner = parse_or(false);
            ts_.expect_symbol(")");
            return inner;
        }
        if (t.kind == TokenKind::identifier) {
            if (t.text == "true" || t.text == "false") {
                bool v = t.text == "true";
                ts_.next();
                return StateFormula::constant(v);
            }
            if (t.text == "P" || t.text == "Pmin" || t.text == "Pmax") {
                return parse_probability(top);
            }
            if (t.text == "R" || t.text == "Rmin" || t.text == "Rmax") {
                ts_.fail_at(t, ErrorKind::syntax, "reward properties are not supported");
            }
            if (t.text == "S") {
                ts_.fail_at(t, ErrorKind::syntax, "steady-state properties are not supported");
            }
        }
        ts_.fail("a state formula");
    }

    StateFormula parse_probability(bool top) {
        const Token& head = ts_.next();
        std::optional<ProbabilityBound> bound;
        if (ts_.accept_symbol("=?")) {
            if (!top) {
                ts_.fail_at(head, ErrorKind::syntax, "P=? is only allowed as the outermost operator");
            }
        } else {
            ProbabilityBound b;
            if (ts_.accept_symbol("<=")) {
                b.relation = Comparison::less_equal;
            } else if (ts_.accept_symbol(">=")) {
                b.relation = Comparison::greater_equal;
            } else if (ts_.accept_symbol("<")) {
                b.relation = Comparison::less;
            } else if (ts_.accept_symbol(">")) {
                b.relation = Comparison::greater;
            } else {
                ts_.fail("'=?' or a comparison after " + head.text);
            }
            const Token& num = ts_.peek();
            if (num.kind != TokenKind::number) ts_.fail("a probability threshold");
            std::optional<Rational> r = Rational::parse_decimal(num.text);
            if (!r) ts_.fail_at(num, ErrorKind::syntax, "malformed threshold '" + num.text + "'");
            if (*r > Rational(1)) {
                ts_.fail_at(num, ErrorKind::syntax, "probability threshold " + num.text + " outside [0, 1]");
            }
            ts_.next();
            b.threshold = r->to_double();
            bound = b;
        }
        ts_.expect_symbol("[");
        PathFormula path = parse_path();
        ts_.expect_symbol("]");
        return StateFormula::probability(bound, std::move(path));
    }

    std::optional<std::uint64_t> parse_step_bound() {
        bool strict = false;
        if (ts_.accept_symbol("<=")) {
            strict = false;
        } else if (ts_.accept_symbol("<")) {
            strict = true;
        } else {
            return std::nullopt;
        }
        const Token& num = ts_.peek();
        std::optional<Rational> r =
            num.kind == TokenKind::number ? Rational::parse_decimal(num.text) : std::optional<Rational>();
        if (!r || !r->is_integer()) ts_.fail("an integer step bound");
        if (strict && r->num() == 0) ts_.fail_at(num, ErrorKind::syntax, "step bound '<0' is empty");
        ts_.next();
        return static_cast<std::uint64_t>(r->num() - (strict ? 1 : 0));
    }

    PathFormula parse_path() {
        PathFormula p;
        if (ts_.accept_keyword("X")) {
            p.kind = PathFormula::Kind::next;
            p.operands.push_back(parse_not(false));
            return p;
        }
        if (ts_.accept_keyword("F")) {
            p.kind = PathFormula::Kind::eventually;
            p.step_bound = parse_step_bound();
            p.operands.push_back(parse_not(false));
            return p;
        }
        if (ts_.accept_keyword("G")) {
            p.kind = PathFormula::Kind::globally;
            p.step_bound = parse_step_bound();
            p.operands.push_back(parse_not(false));
            return p;
        }
        StateFormula left = parse_or(false);
        if (!ts_.accept_keyword("U")) ts_.fail("'U', 'F', 'G' or 'X'");
        p.kind = PathFormula::Kind::until;
        p.step_bound = parse_step_bound();
        p.operands.push_back(std::move(left));
        p.operands.push_back(parse_or(false));
        return p;
    }

    TokenStream ts_;
};

void collect_aps(const StateFormula& f, std::vector<std::string>& out) {
    if (f.kind == StateFormula::Kind::atomic) {
        if (std::find(out.begin(), out.end(), f.label) == out.end()) out.push_back(f.label);
    }
    for (const auto& op : f.operands) collect_aps(op, out);
    if (f.path) {
        for (const auto& op : f.path->operands) collect_aps(op, out);
    }
}

}  // namespace

StateFormula parse_property(std::string_view text) { return PropertyParser(text).parse(); }

std::vector<std::string> split_properties(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        if (auto c = line.find("//"); c != std::string_view::npos) line = line.substr(0, c);
        auto first = line.find_first_not_of(" \t\r");
        if (first != std::string_view::npos) {
            auto last = line.find_last_not_of(" \t\r");
            out.emplace_back(line.substr(first, last - first + 1));
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

std::vector<std::string> atomic_propositions(const StateFormula& f) {
    std::vector<std::string> out;
    collect_aps(f, out);
    return out;
}

}  // namespace llmmc
