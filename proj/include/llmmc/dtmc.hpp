#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "llmmc/error.hpp"
#include "llmmc/oracle.hpp"
#include "llmmc/semantics.hpp"

namespace llmmc {

struct Transition {
    std::size_t target = 0;
    double probability = 0.0;

    friend bool operator==(const Transition&, const Transition&) = default;
};

struct BuildStats {
    std::size_t num_states = 0;
    /// Sparse entries including the self-loops added to terminal states.
    std::size_t num_transitions = 0;
    std::size_t num_terminal_self_loops = 0;
    std::size_t faulty_actions = 0;
    std::size_t llm_calls = 0;
    std::size_t cache_hits = 0;
    double build_time_s = 0.0;
    bool timed_out = false;

    std::size_t num_transitions_without_self_loops() const { return num_transitions - num_terminal_self_loops; }
};

using Clock = std::chrono::steady_clock;

struct BuildLimits {
    /// 0 means unlimited.
    std::size_t max_states = 0;
    /// Five hours by default.
    double wall_clock_budget_s = 18000.0;
    /// Absolute deadline shared with later pipeline stages; when set it takes
    /// precedence over wall_clock_budget_s.
    std::optional<Clock::time_point> deadline;
    /// Abort on the first faulty decision instead of counting it.
    bool strict_faulty = false;
    /// Worker threads that query the oracle ahead of the frontier. 0 = off.
    std::size_t prefetch_workers = 0;
};

/// Chain over the policy-reachable states; state 0 is the initial state.
struct InducedDtmc {
    std::vector<std::string> variable_names;
    std::vector<StateVector> states;
    std::vector<std::vector<Transition>> rows;
    std::vector<std::string> label_names;
    /// Per state, the labels that hold, in label_names order.
    std::vector<std::vector<std::string>> labels;
    /// Absent for terminal states.
    std::vector<std::optional<ActionDecision>> decisions;
    BuildStats stats;

    std::size_t size() const noexcept { return rows.size(); }
    bool has_label(std::size_t state, std::string_view label) const;
    bool is_terminal(std::size_t state) const { return !decisions.at(state).has_value(); }
};

/// Chain assembled from explicit rows, for tests and re-imported files.
InducedDtmc chain_from_rows(std::vector<std::vector<Transition>> rows, std::vector<std::string> label_names,
                            std::vector<std::vector<std::string>> labels);

/// Raised when a build stops early; carries the statistics gathered so far.
class BuildAborted : public Error {
public:
    BuildAborted(ErrorKind kind, const std::string& message, BuildStats stats)
        : Error(kind, message), stats_(stats) {}
    const BuildStats& stats() const noexcept { return stats_; }

private:
    BuildStats stats_;
};

/// Breadth-first construction from the initial state. Each non-terminal
/// state is decided exactly once; unseen successors get indices in
/// lexicographic state order. Terminal states receive a probability-1
/// self-loop. Throws BuildAborted(timeout | state_limit | faulty_action) and
/// propagates oracle errors.
InducedDtmc build_induced_dtmc(const MdpSemantics& mdp, PolicyOracle& oracle, const BuildLimits& limits = {});

/// Shortest decimal that reads back as the same double.
std::string format_probability(double p);

std::string transition_file_text(const InducedDtmc& dtmc);
std::string label_file_text(const InducedDtmc& dtmc);

/// Writes the .tra and .lab files. Throws Error(io).
void export_explicit(const InducedDtmc& dtmc, const std::filesystem::path& tra_path,
                     const std::filesystem::path& lab_path);

/// One JSON object per decided state, in index order.
std::string decision_log(const InducedDtmc& dtmc);

}  // namespace llmmc
