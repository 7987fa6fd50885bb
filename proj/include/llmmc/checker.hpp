#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "llmmc/dtmc.hpp"
#include "llmmc/pctl.hpp"

namespace llmmc {

enum class SolveMethod { graph_only, value_iteration, direct_solve, bounded_iteration };

std::string_view to_string(SolveMethod m);

struct SolverOptions {
    /// Absolute max-norm tolerance on the unbounded-until values.
    double tolerance = 1e-8;
    std::uint64_t max_iterations = 1'000'000;
    /// Solve unbounded until with the dense direct solver instead of value iteration.
    bool prefer_direct = false;
    /// Also run the direct solver and record the largest disagreement.
    bool cross_check = false;
    /// Largest number of undetermined states the dense solver accepts.
    std::size_t direct_limit = 2000;
    std::optional<Clock::time_point> deadline;
};

struct CheckResult {
    /// Probability at the initial state, or 1/0 for a formula without a P operator.
    double value = 0.0;
    /// Present when the outermost formula is not `P=?`.
    std::optional<bool> satisfied;
    /// A bounded comparison whose value lies within 1e-8 of its threshold.
    bool boundary = false;
    std::uint64_t iterations = 0;
    double residual = 0.0;
    SolveMethod method = SolveMethod::graph_only;
    /// Largest |value iteration - direct solve| over all states, when cross-checked.
    std::optional<double> cross_check_deviation;
    /// Per-state values of the outermost formula.
    std::vector<double> state_values;
};

struct QualitativeSets {
    std::vector<bool> prob0;
    std::vector<bool> prob1;
};

/// Graph precomputation for `constraint U target`.
QualitativeSets qualitative_sets(const InducedDtmc& dtmc, const std::vector<bool>& constraint,
                                 const std::vector<bool>& target);

/// Outcome of one path-formula computation over all states.
struct PathValues {
    std::vector<double> values;
    std::uint64_t iterations = 0;
    double residual = 0.0;
    SolveMethod method = SolveMethod::graph_only;
    std::optional<double> cross_check_deviation;
};

PathValues next_probabilities(const InducedDtmc& dtmc, const std::vector<bool>& target);
PathValues until_probabilities(const InducedDtmc& dtmc, const std::vector<bool>& constraint,
                               const std::vector<bool>& target, const SolverOptions& opts = {});
PathValues bounded_until_probabilities(const InducedDtmc& dtmc, const std::vector<bool>& constraint,
                                       const std::vector<bool>& target, std::uint64_t steps,
                                       const SolverOptions& opts = {});

/// States satisfying a state formula. Throws Error(unknown_label).
std::vector<bool> satisfying_states(const InducedDtmc& dtmc, const StateFormula& formula,
                                    const SolverOptions& opts = {});

/// Throws Error(unknown_label | non_convergence | timeout).
CheckResult check(const InducedDtmc& dtmc, const StateFormula& formula, const SolverOptions& opts = {});

}  // namespace llmmc
