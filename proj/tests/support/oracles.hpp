#pragma once

// Test-only reference implementations. None of these call into the checker
// or the chain builder, so they can be used to judge them.

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "llmmc/dtmc.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Gaussian elimination with partial pivoting. Solves a x = b.
std::vector<double> gauss_solve(Matrix a, std::vector<double> b);

/// Sparse rows: rows[s] = {(target, probability)}.
using Rows = std::vector<std::vector<std::pair<std::size_t, double>>>;

Rows rows_of(const llmmc::InducedDtmc& chain);

/// States from which `target` is reachable with positive probability.
std::vector<bool> can_reach(const Rows& rows, const std::vector<bool>& target);

/// Probability of eventually hitting `target` from every state, by one dense
/// linear solve over the states that can reach it.
std::vector<double> reach_probabilities(const Rows& rows, const std::vector<bool>& target);

/// Probability of hitting `target` within `k` steps, by explicit path-mass
/// propagation forward from `start`.
double bounded_reach_forward(const Rows& rows, const std::vector<bool>& target, std::size_t start, std::size_t k);

/// Fraction of `trajectories` simulated runs from `start` that hit `target`.
/// Runs stop once they enter a state that cannot reach the target.
double monte_carlo_reach(const Rows& rows, const std::vector<bool>& target, std::size_t start,
                         std::size_t trajectories, std::mt19937_64& rng);

/// Random chain with `n` states and out-degree in [1, max_degree]. About one
/// in ten states is absorbing. State 0 is the start.
Rows random_rows(std::size_t n, std::size_t max_degree, std::mt19937_64& rng);

llmmc::InducedDtmc chain_of(const Rows& rows, const std::vector<bool>& target, const std::string& label);

/// Symmetric gambler's ruin on 0..n with the start state `k` placed at index 0.
/// `index_of[i]` gives the chain index of fortune i. Label "top" marks n.
llmmc::InducedDtmc gambler_chain(int n, int k, std::vector<std::size_t>* index_of = nullptr);

// Frozen Lake written directly from the grid description: 4x4 cells numbered
// row-major, holes 5, 7, 11, 12, goal 15, absorbing cell 16. A move goes the
// intended way with probability 1/3 and to each perpendicular side with 1/3;
// moves off the grid leave the agent in place.
namespace frozen_lake {

enum class Move { up, down, left, right };

using Policy = std::function<Move(int pos)>;

struct Closure {
    std::set<int> states;
    /// (from, to, probability) with duplicate targets merged.
    std::multiset<std::tuple<int, int, double>> transitions;
    /// P(F water) from every reachable state.
    std::map<int, double> water_probability;
};

bool is_hole(int pos);
std::map<int, double> step(int pos, Move move);
Closure closure(const Policy& policy);

}  // namespace frozen_lake

/// Reads the exported .tra text back into rows. Throws std::runtime_error.
Rows read_tra(const std::string& text);

/// Reads .lab text: label per state index.
std::map<std::size_t, std::set<std::string>> read_lab(const std::string& text, std::vector<std::string>* declared);

}  // namespace oracle
