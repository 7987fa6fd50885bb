#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "llmmc/model.hpp"

namespace llmmc {

/// One value per declared variable, in declaration order.
struct StateVector {
    std::vector<std::int64_t> values;

    friend auto operator<=>(const StateVector&, const StateVector&) = default;
};

struct StateVectorHash {
    std::size_t operator()(const StateVector& s) const noexcept;
};

struct Successor {
    StateVector state;
    double probability = 0.0;
};

/// Support sorted by state, pairwise distinct, probabilities summing to one.
struct Distribution {
    std::vector<Successor> support;
};

/// Explicit-state view of a symbolic MDP. Immutable after construction, so a
/// single instance can serve concurrent explorations.
class MdpSemantics {
public:
    /// Every constant must have a value (see resolve_constants).
    explicit MdpSemantics(SymbolicModel model);

    const SymbolicModel& model() const noexcept { return model_; }
    const std::vector<std::string>& variable_names() const noexcept { return variable_names_; }
    /// Throws Error(unknown_identifier).
    std::size_t variable_index(std::string_view name) const;
    std::int64_t lower_bound(std::size_t var) const { return lower_[var]; }
    std::int64_t upper_bound(std::size_t var) const { return upper_[var]; }

    /// Declared actions, first-appearance order.
    const std::vector<std::string>& actions() const noexcept { return actions_; }
    const std::vector<std::string>& label_names() const noexcept { return label_names_; }

    StateVector initial_state() const;
    bool in_bounds(const StateVector& s) const;

    /// Actions with at least one enabled command, in declaration order.
    /// Empty exactly when `s` is terminal.
    std::vector<std::string> enabled_actions(const StateVector& s) const;

    /// Throws Error(invalid_model) if `action` is not enabled,
    /// Error(nondeterminism) if two commands for `action` are enabled,
    /// Error(bound_violation) if an update leaves a variable's range.
    Distribution successor_distribution(const StateVector& s, std::string_view action) const;

    /// Labels holding in `s`, in declaration order.
    std::vector<std::string> label_set(const StateVector& s) const;

    /// "v1=...;v2=..." in declaration order.
    std::string render(const StateVector& s) const;

private:
    ValueLookup lookup_for(const StateVector& s) const;

    SymbolicModel model_;
    std::vector<std::string> variable_names_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::int64_t> lower_;
    std::vector<std::int64_t> upper_;
    std::vector<std::int64_t> init_;
    std::vector<std::string> actions_;
    std::vector<std::string> label_names_;
};

}  // namespace llmmc
