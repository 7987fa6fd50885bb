#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "../support/oracles.hpp"
#include "llmmc/benchmarks.hpp"
#include "llmmc/checker.hpp"
#include "llmmc/dtmc.hpp"
#include "llmmc/model.hpp"
#include "llmmc/pctl.hpp"

using namespace llmmc;

namespace {

MdpSemantics load(const std::string& name) { return MdpSemantics(load_model(fixture(name).model_path)); }

StateVector state_of(const MdpSemantics& mdp, std::map<std::string, long> values) {
    StateVector s = mdp.initial_state();
    for (const auto& [name, v] : values) s.values[mdp.variable_index(name)] = v;
    return s;
}

double check_value(const InducedDtmc& d, const std::string& prop) { return check(d, parse_property(prop)).value; }

}  // namespace

TEST_CASE("all fixtures load, validate and declare their labels") {
    CHECK(benchmark_names() == std::vector<std::string>{"frozen_lake", "taxi", "stock_market"});
    for (const auto& name : benchmark_names()) {
        CAPTURE(name);
        BenchmarkFixture f = fixture(name);
        SymbolicModel m = load_model(f.model_path);
        CHECK(validate_model(m).empty());
        MdpSemantics mdp(m);
        CHECK_FALSE(f.properties.empty());
        for (const auto& p : f.properties) {
            for (const auto& ap : atomic_propositions(parse_property(p))) {
                auto names = mdp.label_names();
                CHECK(std::find(names.begin(), names.end(), ap) != names.end());
            }
        }
        auto prompt = PromptTemplate::load(f.template_path);
        CHECK_NOTHROW(encode_state(prompt, mdp, mdp.initial_state(), load_var_map(f.var_map_path)));
        CHECK(f.scripted_policies == scripted_policies(name));
    }
}

TEST_CASE("unknown names") {
    CHECK_THROWS_AS(fixture("pacman"), Error);
    CHECK_THROWS_AS(make_scripted_policy("taxi", "teleport"), Error);
    CHECK_THROWS_AS(make_scripted_policy("pacman", "x"), Error);
}

TEST_CASE("shipped policy tables equal the regenerated ones") {
    for (const auto& name : benchmark_names()) {
        BenchmarkFixture f = fixture(name);
        MdpSemantics mdp = load(name);
        for (const auto& p : f.scripted_policies) {
            CAPTURE(name);
            CAPTURE(p);
            auto rule = make_scripted_policy(name, p);
            auto generated = policy_table(mdp, *rule);
            TablePolicy shipped = TablePolicy::load(f.policy_table(p));
            CHECK(shipped.table() == generated);

            auto again = make_scripted_policy(name, p);
            InducedDtmc from_rule = build_induced_dtmc(mdp, *again);
            InducedDtmc from_table = build_induced_dtmc(mdp, shipped);
            CHECK(from_table.states == from_rule.states);
            CHECK(from_table.rows == from_rule.rows);
            CHECK(from_table.stats.faulty_actions == 0);
            std::size_t decided = 0;
            for (std::size_t s = 0; s < from_table.size(); ++s) decided += from_table.is_terminal(s) ? 0 : 1;
            CHECK(decided == generated.size());
        }
    }
}

TEST_CASE("frozen lake fixture dynamics") {
    MdpSemantics mdp = load("frozen_lake");
    StateVector start = mdp.initial_state();
    CHECK(mdp.render(start) == "pos=0");
    CHECK(mdp.enabled_actions(state_of(mdp, {{"pos", 3}})) == std::vector<std::string>{"up", "left", "down", "right"});
    for (int pos : {5, 7, 11, 12}) {
        auto labels = mdp.label_set(state_of(mdp, {{"pos", pos}}));
        CHECK(std::find(labels.begin(), labels.end(), "water") != labels.end());
    }
    // every cell and move agrees with the grid oracle
    using oracle::frozen_lake::Move;
    const std::pair<const char*, Move> moves[] = {
        {"up", Move::up}, {"down", Move::down}, {"left", Move::left}, {"right", Move::right}};
    for (int pos = 0; pos <= 15; ++pos) {
        for (const auto& [action, move] : moves) {
            CAPTURE(pos);
            CAPTURE(action);
            auto dist = mdp.successor_distribution(state_of(mdp, {{"pos", pos}}), action);
            std::map<int, double> got;
            for (const auto& succ : dist.support) got[static_cast<int>(succ.state.values[0])] += succ.probability;
            auto want = oracle::frozen_lake::step(pos, move);
            REQUIRE(got.size() == want.size());
            for (const auto& [cell, p] : want) CHECK(std::abs(got[cell] - p) < 1e-15);
        }
    }
}

TEST_CASE("taxi fixture dynamics") {
    MdpSemantics mdp = load("taxi");
    CHECK(mdp.enabled_actions(state_of(mdp, {{"fuel", 0}})).empty());
    auto labels = mdp.label_set(state_of(mdp, {{"fuel", 0}}));
    CHECK(std::find(labels.begin(), labels.end(), "empty") != labels.end());
    // refuel on arrival at the station
    auto dist = mdp.successor_distribution(state_of(mdp, {{"x", 0}, {"y", 2}, {"fuel", 3}}), "right");
    REQUIRE(dist.support.size() == 1);
    CHECK(mdp.render(dist.support[0].state) == "x=1;y=2;fuel=10");
    // other moves burn one unit of fuel, also against a wall
    dist = mdp.successor_distribution(state_of(mdp, {{"x", 0}, {"y", 0}, {"fuel", 3}}), "left");
    CHECK(mdp.render(dist.support[0].state) == "x=0;y=0;fuel=2");

    auto greedy = make_scripted_policy("taxi", "greedy-toward-gas");
    CHECK(greedy->decide(mdp, state_of(mdp, {{"x", 0}, {"y", 2}, {"fuel", 5}})).action == "right");
}

TEST_CASE("stock market fixture dynamics") {
    MdpSemantics mdp = load("stock_market");
    StateVector poor = state_of(mdp, {{"buy_price", 10}, {"sell_price", 9}, {"capital", 9}, {"stocks", 0}});
    auto enabled = mdp.enabled_actions(poor);
    CHECK(std::find(enabled.begin(), enabled.end(), "buy") == enabled.end());
    StateVector rich = state_of(mdp, {{"buy_price", 3}, {"sell_price", 2}, {"capital", 10}, {"stocks", 0}});
    enabled = mdp.enabled_actions(rich);
    CHECK(std::find(enabled.begin(), enabled.end(), "buy") != enabled.end());
    for (const auto& [succ, p] : mdp.successor_distribution(rich, "buy").support) {
        CHECK(p == doctest::Approx(1.0 / 3.0));
        CHECK(succ.values[mdp.variable_index("stocks")] == 3);
        CHECK(succ.values[mdp.variable_index("capital")] == 1);
        CHECK(succ.values[mdp.variable_index("sell_price")] == succ.values[mdp.variable_index("buy_price")] - 1);
    }
}

TEST_CASE("reference chains") {
    SUBCASE("frozen lake") {
        MdpSemantics mdp = load("frozen_lake");
        auto down = make_scripted_policy("frozen_lake", "constant-down");
        InducedDtmc d = build_induced_dtmc(mdp, *down);
        CHECK(d.stats.num_states == 17);
        CHECK(d.stats.num_transitions == 39);
        auto right = make_scripted_policy("frozen_lake", "constant-right");
        InducedDtmc r = build_induced_dtmc(mdp, *right);
        CHECK(r.stats.num_states == 17);
        CHECK(r.stats.num_transitions == 38);

        auto ref = oracle::frozen_lake::closure([](int) { return oracle::frozen_lake::Move::right; });
        CHECK(std::abs(check_value(r, "P=? [ F \"water\" ]") - ref.water_probability.at(0)) < 1e-8);
        CHECK(std::abs(check_value(r, "P=? [ F \"water\" ]") + check_value(r, "P=? [ F \"frisbee\" ]") - 1.0) < 1e-8);
    }
    SUBCASE("taxi") {
        MdpSemantics mdp = load("taxi");
        auto up = make_scripted_policy("taxi", "constant-up");
        InducedDtmc d = build_induced_dtmc(mdp, *up);
        CHECK(d.stats.num_states == 11);
        CHECK(d.stats.num_transitions == 11);
        CHECK(check_value(d, "P=? [ F \"empty\" ]") == 1.0);
        auto greedy = make_scripted_policy("taxi", "greedy-toward-gas");
        CHECK(check_value(build_induced_dtmc(mdp, *greedy), "P=? [ F \"empty\" ]") == 0.0);
    }
    SUBCASE("stock market") {
        MdpSemantics mdp = load("stock_market");
        auto hold = make_scripted_policy("stock_market", "hold-only");
        InducedDtmc d = build_induced_dtmc(mdp, *hold);
        oracle::Rows rows = oracle::rows_of(d);
        std::vector<bool> bankrupt(d.size());
        for (std::size_t s = 0; s < d.size(); ++s) bankrupt[s] = d.has_label(s, "bankruptcy");
        CHECK(oracle::reach_probabilities(rows, bankrupt)[0] == 0.0);
        CHECK(check_value(d, "P=? [ F \"bankruptcy\" ]") == 0.0);
    }
}

TEST_CASE("environment override of the fixture root") {
    const char* old = std::getenv("LLMMC_BENCHMARK_DIR");
    std::string saved = old != nullptr ? old : "";
    setenv("LLMMC_BENCHMARK_DIR", "/nonexistent/fixtures", 1);
    CHECK(benchmark_root() == std::filesystem::path("/nonexistent/fixtures"));
    CHECK_THROWS_AS(fixture("taxi"), Error);
    if (old != nullptr) {
        setenv("LLMMC_BENCHMARK_DIR", saved.c_str(), 1);
    } else {
        unsetenv("LLMMC_BENCHMARK_DIR");
    }
}
