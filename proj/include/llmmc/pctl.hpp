#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace llmmc {

enum class Comparison { less, less_equal, greater, greater_equal };

std::string_view symbol(Comparison c);
bool compare(Comparison c, double value, double threshold);

struct ProbabilityBound {
    Comparison relation = Comparison::less_equal;
    double threshold = 0.0;

    friend bool operator==(const ProbabilityBound&, const ProbabilityBound&) = default;
};

struct PathFormula;

/// PCTL state formula over quoted atomic propositions.
struct StateFormula {
    enum class Kind { constant, atomic, negation, conjunction, disjunction, probability };

    Kind kind = Kind::constant;
    bool value = true;                     // constant
    std::string label;                     // atomic
    std::vector<StateFormula> operands;    // negation: 1, conjunction/disjunction: 2
    std::optional<ProbabilityBound> bound;  // probability; absent for P=?
    std::shared_ptr<const PathFormula> path;

    static StateFormula constant(bool v);
    static StateFormula atomic(std::string name);
    static StateFormula negation(StateFormula f);
    static StateFormula conjunction(StateFormula a, StateFormula b);
    static StateFormula disjunction(StateFormula a, StateFormula b);
    static StateFormula probability(std::optional<ProbabilityBound> bound, PathFormula path);

    std::string to_string() const;
    friend bool operator==(const StateFormula& a, const StateFormula& b);
};

struct PathFormula {
    enum class Kind { next, until, eventually, globally };

    Kind kind = Kind::eventually;
    /// next/eventually/globally: one operand; until: two (left, right).
    std::vector<StateFormula> operands;
    /// Step bound for until/eventually/globally ("F<=k").
    std::optional<std::uint64_t> step_bound;

    std::string to_string() const;
    friend bool operator==(const PathFormula&, const PathFormula&) = default;
};

/// Parses one property, e.g. `P=? [ F "water" ]` or `P<=0.1 [ "a" U<=5 "b" ]`.
/// `P=?` is only accepted at the outermost level. Reward and steady-state
/// operators are rejected. Throws Error(syntax).
StateFormula parse_property(std::string_view text);

/// One property per non-empty line; `//` starts a comment.
std::vector<std::string> split_properties(std::string_view text);

/// Atomic propositions the formula mentions.
std::vector<std::string> atomic_propositions(const StateFormula& f);

}  // namespace llmmc
