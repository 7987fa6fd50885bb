#include "llmmc/expr.hpp"

#include <algorithm>

#include "llmmc/error.hpp"

namespace llmmc {

std::string_view to_string(ValueType type) {
    switch (type) {
        case ValueType::boolean: return "bool";
        case ValueType::integer: return "int";
        case ValueType::rational: return "double";
    }
    return "?";
}

bool Value::as_bool() const {
    if (const bool* b = std::get_if<bool>(&data_)) {
        return *b;
    }
    throw Error(ErrorKind::type_mismatch, "expected a boolean, got " + to_string());
}

const Rational& Value::as_number() const {
    if (const Rational* r = std::get_if<Rational>(&data_)) {
        return *r;
    }
    throw Error(ErrorKind::type_mismatch, "expected a number, got " + to_string());
}

std::int64_t Value::as_integer() const {
    const Rational& r = as_number();
    if (!r.is_integer()) {
        throw Error(ErrorKind::evaluation, "expected an integer, got " + r.to_string());
    }
    return r.num();
}

std::string Value::to_string() const {
    if (const bool* b = std::get_if<bool>(&data_)) {
        return *b ? "true" : "false";
    }
    return std::get<Rational>(data_).to_string();
}

std::string_view symbol(UnaryOp op) { return op == UnaryOp::negate ? "-" : "!"; }

std::string_view symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::add: return "+";
        case BinaryOp::subtract: return "-";
        case BinaryOp::multiply: return "*";
        case BinaryOp::divide: return "/";
        case BinaryOp::less: return "<";
        case BinaryOp::less_equal: return "<=";
        case BinaryOp::greater: return ">";
        case BinaryOp::greater_equal: return ">=";
        case BinaryOp::equal: return "=";
        case BinaryOp::not_equal: return "!=";
        case BinaryOp::logical_and: return "&";
        case BinaryOp::logical_or: return "|";
        case BinaryOp::implies: return "=>";
        case BinaryOp::iff: return "<=>";
    }
    return "?";
}

std::string_view name(Function fn) {
    switch (fn) {
        case Function::min: return "min";
        case Function::max: return "max";
        case Function::mod: return "mod";
        case Function::floor: return "floor";
        case Function::ceil: return "ceil";
    }
    return "?";
}

std::optional<Function> function_from_name(std::string_view text) {
    for (Function fn : {Function::min, Function::max, Function::mod, Function::floor, Function::ceil}) {
        if (name(fn) == text) return fn;
    }
    return std::nullopt;
}

struct ExprNode {
    Expr::Kind kind;
    Rational number;
    bool flag = false;  // integer_literal for numbers, value for booleans
    std::string name;
    UnaryOp unary = UnaryOp::negate;
    BinaryOp binary = BinaryOp::add;
    Function function = Function::min;
    std::vector<Expr> operands;
};

Expr Expr::number(Rational value, bool integer_literal) {
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::number;
    n->number = value;
    n->flag = integer_literal;
    return Expr(std::move(n));
}

Expr Expr::boolean(bool value) {
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::boolean;
    n->flag = value;
    return Expr(std::move(n));
}

Expr Expr::identifier(std::string ident) {
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::identifier;
    n->name = std::move(ident);
    return Expr(std::move(n));
}

Expr Expr::unary(UnaryOp op, Expr operand) {
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::unary;
    n->unary = op;
    n->operands.push_back(std::move(operand));
    return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::binary;
    n->binary = op;
    n->operands.push_back(std::move(lhs));
    n->operands.push_back(std::move(rhs));
    return Expr(std::move(n));
}

Expr Expr::call(Function fn, std::vector<Expr> args) {
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::call;
    n->function = fn;
    n->operands = std::move(args);
    return Expr(std::move(n));
}

Expr Expr::ternary(Expr condition, Expr then_expr, Expr else_expr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::ternary;
    n->operands = {std::move(condition), std::move(then_expr), std::move(else_expr)};
    return Expr(std::move(n));
}

const ExprNode& Expr::node() const {
    if (!node_) {
        throw Error(ErrorKind::invalid_model, "empty expression");
    }
    return *node_;
}

Expr::Kind Expr::kind() const { return node().kind; }
const Rational& Expr::number_value() const { return node().number; }
bool Expr::integer_literal() const { return node().flag; }
bool Expr::boolean_value() const { return node().flag; }
const std::string& Expr::identifier_name() const { return node().name; }
UnaryOp Expr::unary_op() const { return node().unary; }
BinaryOp Expr::binary_op() const { return node().binary; }
Function Expr::function() const { return node().function; }
const std::vector<Expr>& Expr::operands() const { return node().operands; }

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (!a.node_ || !b.node_) return false;
    const ExprNode& x = *a.node_;
    const ExprNode& y = *b.node_;
    if (x.kind != y.kind) return false;
    switch (x.kind) {
        case Expr::Kind::number: return x.number == y.number && x.flag == y.flag;
        case Expr::Kind::boolean: return x.flag == y.flag;
        case Expr::Kind::identifier: return x.name == y.name;
        case Expr::Kind::unary: return x.unary == y.unary && x.operands == y.operands;
        case Expr::Kind::binary: return x.binary == y.binary && x.operands == y.operands;
        case Expr::Kind::call: return x.function == y.function && x.operands == y.operands;
        case Expr::Kind::ternary: return x.operands == y.operands;
    }
    return false;
}

namespace {

// Binding strength used by both the printer and (implicitly) the parser.
int precedence(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::ternary: return 0;
        case Expr::Kind::unary: return e.unary_op() == UnaryOp::logical_not ? 5 : 10;
        case Expr::Kind::binary:
            switch (e.binary_op()) {
                case BinaryOp::iff: return 1;
                case BinaryOp::implies: return 2;
                case BinaryOp::logical_or: return 3;
                case BinaryOp::logical_and: return 4;
                case BinaryOp::equal:
                case BinaryOp::not_equal: return 6;
                case BinaryOp::less:
                case BinaryOp::less_equal:
                case BinaryOp::greater:
                case BinaryOp::greater_equal: return 7;
                case BinaryOp::add:
                case BinaryOp::subtract: return 8;
                case BinaryOp::multiply:
                case BinaryOp::divide: return 9;
            }
            return 0;
        case Expr::Kind::number:
            return e.number_value() < Rational(0) || !e.number_value().has_finite_decimal() ? 0 : 11;
        default: return 11;
    }
}

bool is_chain_free(BinaryOp op) {
    switch (op) {
        case BinaryOp::equal:
        case BinaryOp::not_equal:
        case BinaryOp::less:
        case BinaryOp::less_equal:
        case BinaryOp::greater:
        case BinaryOp::greater_equal: return true;
        default: return false;
    }
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out) {
    if (wrap) out += '(';
    print(e, out);
    if (wrap) out += ')';
}

void print(const Expr& e, std::string& out) {
    switch (e.kind()) {
        case Expr::Kind::number: {
            const Rational& r = e.number_value();
            if (!r.has_finite_decimal()) {
                out += r.to_string();
            } else if (e.integer_literal() || !r.is_integer()) {
                out += r.to_string();
            } else {
                out += r.to_string() + ".0";
            }
            return;
        }
        case Expr::Kind::boolean: out += e.boolean_value() ? "true" : "false"; return;
        case Expr::Kind::identifier: out += e.identifier_name(); return;
        case Expr::Kind::unary: {
            const Expr& operand = e.operands()[0];
            out += symbol(e.unary_op());
            print_wrapped(operand, precedence(operand) < precedence(e), out);
            return;
        }
        case Expr::Kind::binary: {
            int p = precedence(e);
            const Expr& lhs = e.operands()[0];
            const Expr& rhs = e.operands()[1];
            bool chain_free = is_chain_free(e.binary_op());
            print_wrapped(lhs, chain_free ? precedence(lhs) <= p : precedence(lhs) < p, out);
            out += ' ';
            out += symbol(e.binary_op());
            out += ' ';
            print_wrapped(rhs, precedence(rhs) <= p, out);
            return;
        }
        case Expr::Kind::call: {
            out += name(e.function());
            out += '(';
            for (std::size_t i = 0; i < e.operands().size(); ++i) {
                if (i > 0) out += ", ";
                print(e.operands()[i], out);
            }
            out += ')';
            return;
        }
        case Expr::Kind::ternary: {
            const Expr& cond = e.operands()[0];
            print_wrapped(cond, precedence(cond) <= 0, out);
            out += " ? ";
            print(e.operands()[1], out);
            out += " : ";
            print(e.operands()[2], out);
            return;
        }
    }
}

Rational number_of(const Value& v) { return v.as_number(); }

Value eval(const Expr& e, const ValueLookup& lookup) {
    switch (e.kind()) {
        case Expr::Kind::number: return Value(e.number_value());
        case Expr::Kind::boolean: return Value(e.boolean_value());
        case Expr::Kind::identifier: {
            std::optional<Value> v = lookup ? lookup(e.identifier_name()) : std::nullopt;
            if (!v) {
                throw Error(ErrorKind::unknown_identifier, "unknown identifier '" + e.identifier_name() + "'");
            }
            return *v;
        }
        case Expr::Kind::unary: {
            Value v = eval(e.operands()[0], lookup);
            if (e.unary_op() == UnaryOp::negate) return Value(-v.as_number());
            return Value(!v.as_bool());
        }
        case Expr::Kind::binary: {
            const Expr& lhs_expr = e.operands()[0];
            const Expr& rhs_expr = e.operands()[1];
            switch (e.binary_op()) {
                case BinaryOp::logical_and:
                    if (!eval(lhs_expr, lookup).as_bool()) return Value(false);
                    return Value(eval(rhs_expr, lookup).as_bool());
                case BinaryOp::logical_or:
                    if (eval(lhs_expr, lookup).as_bool()) return Value(true);
                    return Value(eval(rhs_expr, lookup).as_bool());
                case BinaryOp::implies:
                    if (!eval(lhs_expr, lookup).as_bool()) return Value(true);
                    return Value(eval(rhs_expr, lookup).as_bool());
                default: break;
            }
            Value lhs = eval(lhs_expr, lookup);
            Value rhs = eval(rhs_expr, lookup);
            switch (e.binary_op()) {
                case BinaryOp::add: return Value(number_of(lhs) + number_of(rhs));
                case BinaryOp::subtract: return Value(number_of(lhs) - number_of(rhs));
                case BinaryOp::multiply: return Value(number_of(lhs) * number_of(rhs));
                case BinaryOp::divide: return Value(number_of(lhs) / number_of(rhs));
                case BinaryOp::less: return Value(number_of(lhs) < number_of(rhs));
                case BinaryOp::less_equal: return Value(number_of(lhs) <= number_of(rhs));
                case BinaryOp::greater: return Value(number_of(lhs) > number_of(rhs));
                case BinaryOp::greater_equal: return Value(number_of(lhs) >= number_of(rhs));
                case BinaryOp::equal:
                case BinaryOp::not_equal: {
                    if (lhs.is_bool() != rhs.is_bool()) {
                        throw Error(ErrorKind::type_mismatch,
                                    "cannot compare " + lhs.to_string() + " with " + rhs.to_string());
                    }
                    bool same = lhs == rhs;
                    return Value(e.binary_op() == BinaryOp::equal ? same : !same);
                }
                case BinaryOp::iff: return Value(lhs.as_bool() == rhs.as_bool());
                default: break;
            }
            throw Error(ErrorKind::evaluation, "unsupported operator");
        }
        case Expr::Kind::call: {
            const auto& args = e.operands();
            switch (e.function()) {
                case Function::min:
                case Function::max: {
                    Rational best = eval(args.at(0), lookup).as_number();
                    for (std::size_t i = 1; i < args.size(); ++i) {
                        Rational v = eval(args[i], lookup).as_number();
                        if (e.function() == Function::min ? v < best : v > best) best = v;
                    }
                    return Value(best);
                }
                case Function::mod: {
                    std::int64_t a = eval(args.at(0), lookup).as_integer();
                    std::int64_t b = eval(args.at(1), lookup).as_integer();
                    if (b == 0) throw Error(ErrorKind::evaluation, "modulo by zero");
                    return Value(floored_mod(a, b));
                }
                case Function::floor: return Value(eval(args.at(0), lookup).as_number().floor());
                case Function::ceil: return Value(eval(args.at(0), lookup).as_number().ceil());
            }
            throw Error(ErrorKind::evaluation, "unsupported function");
        }
        case Expr::Kind::ternary: {
            bool cond = eval(e.operands()[0], lookup).as_bool();
            return eval(e.operands()[cond ? 1 : 2], lookup);
        }
    }
    throw Error(ErrorKind::evaluation, "malformed expression");
}

[[noreturn]] void type_error(const Expr& e, const std::string& what) {
    throw Error(ErrorKind::type_mismatch, what + " in '" + e.to_string() + "'");
}

bool numeric(ValueType t) { return t != ValueType::boolean; }

ValueType join_numeric(ValueType a, ValueType b) {
    return a == ValueType::integer && b == ValueType::integer ? ValueType::integer : ValueType::rational;
}

}  // namespace

std::string Expr::to_string() const {
    std::string out;
    print(*this, out);
    return out;
}

Value evaluate(const Expr& expr, const ValueLookup& lookup) { return eval(expr, lookup); }

std::optional<Value> try_evaluate_constant(const Expr& expr, const std::map<std::string, Value>& constants) {
    std::set<std::string> names;
    collect_identifiers(expr, names);
    for (const auto& n : names) {
        if (!constants.contains(n)) return std::nullopt;
    }
    return evaluate(expr, [&](const std::string& n) -> std::optional<Value> { return constants.at(n); });
}

ValueType type_of(const Expr& e, const TypeLookup& lookup) {
    switch (e.kind()) {
        case Expr::Kind::number: return e.integer_literal() ? ValueType::integer : ValueType::rational;
        case Expr::Kind::boolean: return ValueType::boolean;
        case Expr::Kind::identifier: {
            std::optional<ValueType> t = lookup ? lookup(e.identifier_name()) : std::nullopt;
            if (!t) throw Error(ErrorKind::unknown_identifier, "unknown identifier '" + e.identifier_name() + "'");
            return *t;
        }
        case Expr::Kind::unary: {
            ValueType t = type_of(e.operands()[0], lookup);
            if (e.unary_op() == UnaryOp::negate) {
                if (!numeric(t)) type_error(e, "negation of a boolean");
                return t;
            }
            if (t != ValueType::boolean) type_error(e, "logical negation of a number");
            return ValueType::boolean;
        }
        case Expr::Kind::binary: {
            ValueType a = type_of(e.operands()[0], lookup);
            ValueType b = type_of(e.operands()[1], lookup);
            switch (e.binary_op()) {
                case BinaryOp::add:
                case BinaryOp::subtract:
                case BinaryOp::multiply:
                    if (!numeric(a) || !numeric(b)) type_error(e, "arithmetic on a boolean");
                    return join_numeric(a, b);
                case BinaryOp::divide:
                    if (!numeric(a) || !numeric(b)) type_error(e, "arithmetic on a boolean");
                    return ValueType::rational;
                case BinaryOp::less:
                case BinaryOp::less_equal:
                case BinaryOp::greater:
                case BinaryOp::greater_equal:
                    if (!numeric(a) || !numeric(b)) type_error(e, "ordering comparison on a boolean");
                    return ValueType::boolean;
                case BinaryOp::equal:
                case BinaryOp::not_equal:
                    if (numeric(a) != numeric(b)) type_error(e, "equality between a boolean and a number");
                    return ValueType::boolean;
                case BinaryOp::logical_and:
                case BinaryOp::logical_or:
                case BinaryOp::implies:
                case BinaryOp::iff:
                    if (a != ValueType::boolean || b != ValueType::boolean) type_error(e, "logical operator on a number");
                    return ValueType::boolean;
            }
            type_error(e, "unsupported operator");
        }
        case Expr::Kind::call: {
            const auto& args = e.operands();
            std::vector<ValueType> types;
            for (const auto& a : args) types.push_back(type_of(a, lookup));
            for (ValueType t : types) {
                if (!numeric(t)) type_error(e, "boolean argument to " + std::string(name(e.function())));
            }
            switch (e.function()) {
                case Function::min:
                case Function::max: {
                    if (types.size() < 2) type_error(e, "min/max need at least two arguments");
                    ValueType t = types[0];
                    for (ValueType u : types) t = join_numeric(t, u);
                    return t;
                }
                case Function::mod:
                    if (types.size() != 2) type_error(e, "mod takes two arguments");
                    if (types[0] != ValueType::integer || types[1] != ValueType::integer) {
                        type_error(e, "mod needs integer arguments");
                    }
                    return ValueType::integer;
                case Function::floor:
                case Function::ceil:
                    if (types.size() != 1) type_error(e, "floor/ceil take one argument");
                    return ValueType::integer;
            }
            type_error(e, "unsupported function");
        }
        case Expr::Kind::ternary: {
            if (type_of(e.operands()[0], lookup) != ValueType::boolean) type_error(e, "non-boolean condition");
            ValueType a = type_of(e.operands()[1], lookup);
            ValueType b = type_of(e.operands()[2], lookup);
            if (numeric(a) != numeric(b)) type_error(e, "branches of different kinds");
            return numeric(a) ? join_numeric(a, b) : ValueType::boolean;
        }
    }
    type_error(e, "malformed expression");
}

void collect_identifiers(const Expr& expr, std::set<std::string>& out) {
    for_each_subexpression(expr, [&](const Expr& e) {
        if (e.kind() == Expr::Kind::identifier) out.insert(e.identifier_name());
    });
}

Expr substitute(const Expr& expr, const std::map<std::string, Expr>& replacements) {
    switch (expr.kind()) {
        case Expr::Kind::identifier: {
            auto it = replacements.find(expr.identifier_name());
            return it == replacements.end() ? expr : it->second;
        }
        case Expr::Kind::number:
        case Expr::Kind::boolean: return expr;
        case Expr::Kind::unary: return Expr::unary(expr.unary_op(), substitute(expr.operands()[0], replacements));
        case Expr::Kind::binary:
            return Expr::binary(expr.binary_op(), substitute(expr.operands()[0], replacements),
                                substitute(expr.operands()[1], replacements));
        case Expr::Kind::call: {
            std::vector<Expr> args;
            for (const auto& a : expr.operands()) args.push_back(substitute(a, replacements));
            return Expr::call(expr.function(), std::move(args));
        }
        case Expr::Kind::ternary:
            return Expr::ternary(substitute(expr.operands()[0], replacements), substitute(expr.operands()[1], replacements),
                                 substitute(expr.operands()[2], replacements));
    }
    return expr;
}

Expr literal(const Value& value) {
    if (value.is_bool()) return Expr::boolean(value.as_bool());
    const Rational& r = value.as_number();
    return Expr::number(r, r.is_integer());
}

void for_each_subexpression(const Expr& expr, const std::function<void(const Expr&)>& visit) {
    if (expr.empty()) return;
    visit(expr);
    switch (expr.kind()) {
        case Expr::Kind::unary:
        case Expr::Kind::binary:
        case Expr::Kind::call:
        case Expr::Kind::ternary:
            for (const auto& child : expr.operands()) for_each_subexpression(child, visit);
            break;
        default: break;
    }
}

}  // namespace llmmc
