#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "llmmc/checker.hpp"
#include "llmmc/error.hpp"

using namespace llmmc;

namespace {

InducedDtmc chain(std::vector<std::vector<Transition>> rows, std::vector<std::string> names,
                  std::vector<std::vector<std::string>> labels) {
    return chain_from_rows(std::move(rows), std::move(names), std::move(labels));
}

/// 0 -> {1: 0.5, 2: 0.5}; 1 and 2 absorbing; 1 is "goal".
InducedDtmc split() { return chain({{{1, 0.5}, {2, 0.5}}, {{1, 1.0}}, {{2, 1.0}}}, {"goal"}, {{}, {"goal"}, {}}); }

/// 0 stays with 0.5 and moves to the absorbing "done" state 1 with 0.5.
InducedDtmc half_loop() { return chain({{{0, 0.5}, {1, 0.5}}, {{1, 1.0}}}, {"done"}, {{}, {"done"}}); }

std::vector<bool> labelled(const InducedDtmc& d, const std::string& l) {
    std::vector<bool> out(d.size());
    for (std::size_t s = 0; s < d.size(); ++s) out[s] = d.has_label(s, l);
    return out;
}

}  // namespace

TEST_CASE("two-way split") {
    CheckResult r = check(split(), parse_property("P=? [ F \"goal\" ]"));
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(r.satisfied.has_value());
    CheckResult b = check(split(), parse_property("P>=0.5 [ F \"goal\" ]"));
    CHECK(*b.satisfied);
    CHECK(b.boundary);
    CHECK_FALSE(*check(split(), parse_property("P>0.6 [ F \"goal\" ]")).satisfied);
}

TEST_CASE("gambler's ruin") {
    for (int n : {4, 10}) {
        for (int k = 0; k <= n; ++k) {
            CAPTURE(n);
            CAPTURE(k);
            InducedDtmc d = oracle::gambler_chain(n, k);
            CHECK(std::abs(check(d, parse_property("P=? [ F \"top\" ]")).value - double(k) / n) < 1e-8);
        }
    }
}

TEST_CASE("graph precomputation on the gambler chain") {
    std::vector<std::size_t> idx;
    InducedDtmc d = oracle::gambler_chain(4, 2, &idx);
    QualitativeSets q = qualitative_sets(d, std::vector<bool>(d.size(), true), labelled(d, "top"));
    for (int i = 0; i <= 4; ++i) {
        CAPTURE(i);
        CHECK(q.prob0[idx[i]] == (i == 0));
        CHECK(q.prob1[idx[i]] == (i == 4));
    }
}

TEST_CASE("step-bounded reachability through a self-loop") {
    CHECK(check(half_loop(), parse_property("P=? [ F<=2 \"done\" ]")).value == doctest::Approx(0.75).epsilon(1e-12));
    for (unsigned k : {0U, 1U, 2U, 10U, 60U}) {
        CheckResult r = check(half_loop(), parse_property("P=? [ F<=" + std::to_string(k) + " \"done\" ]"));
        CHECK(std::abs(r.value - (1.0 - std::pow(0.5, k))) < 1e-12);
        CHECK(r.method == SolveMethod::bounded_iteration);
    }
}

TEST_CASE("zero-step bound only sees the initial state") {
    CHECK(check(split(), parse_property("P=? [ F<=0 \"init\" ]")).value == 1.0);
    CHECK(check(split(), parse_property("P=? [ F<=0 \"goal\" ]")).value == 0.0);
}

TEST_CASE("graph-only answers are exact") {
    InducedDtmc d = chain({{{1, 0.3}, {2, 0.7}}, {{1, 1.0}}, {{1, 1.0}}}, {"goal"}, {{}, {"goal"}, {}});
    CheckResult r = check(d, parse_property("P=? [ F \"goal\" ]"));
    CHECK(r.value == 1.0);
    CHECK(r.method == SolveMethod::graph_only);
    CHECK(r.iterations == 0);
}

TEST_CASE("next, until and globally") {
    InducedDtmc d = chain({{{0, 0.2}, {1, 0.3}, {2, 0.5}}, {{2, 1.0}}, {{2, 1.0}}}, {"a", "b"},
                          {{"a"}, {"b"}, {}});
    CHECK(check(d, parse_property("P=? [ X \"b\" ]")).value == doctest::Approx(0.3));
    // stay in "a" until "b": 0.3 / (1 - 0.2)
    CHECK(check(d, parse_property("P=? [ \"a\" U \"b\" ]")).value == doctest::Approx(0.375).epsilon(1e-9));
    CHECK(check(d, parse_property("P=? [ G \"a\" ]")).value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(check(d, parse_property("P=? [ G<=1 \"a\" ]")).value == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(check(d, parse_property("P=? [ \"a\" U<=1 \"b\" ]")).value == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("formulas without a probability operator") {
    CheckResult r = check(split(), parse_property("!\"goal\""));
    CHECK(r.value == 1.0);
    CHECK(*r.satisfied);
    CHECK_FALSE(*check(split(), parse_property("\"goal\" | false")).satisfied);
}

TEST_CASE("nested probability operators") {
    // states where goal is reached surely: 1 only; from 0 this happens with 0.5
    StateFormula f = parse_property("P=? [ F P>=1 [ F \"goal\" ] ]");
    CHECK(check(split(), f).value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("errors") {
    try {
        check(split(), parse_property("P=? [ F \"lava\" ]"));
        FAIL("expected unknown label");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unknown_label);
    }
    InducedDtmc slow = oracle::gambler_chain(50, 25);
    SolverOptions opts;
    opts.max_iterations = 3;
    try {
        check(slow, parse_property("P=? [ F \"top\" ]"), opts);
        FAIL("expected non-convergence");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::non_convergence);
    }
    SolverOptions late;
    late.deadline = Clock::now() - std::chrono::seconds(1);
    try {
        check(slow, parse_property("P=? [ F \"top\" ]"), late);
        FAIL("expected a timeout");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::timeout);
    }
}

TEST_CASE("value iteration, direct solve and the reference solver agree on random chains") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        oracle::Rows rows = oracle::random_rows(25, 4, rng);
        std::vector<bool> target(rows.size(), false);
        target[rows.size() - 1] = true;
        target[rows.size() / 2] = true;
        InducedDtmc d = oracle::chain_of(rows, target, "t");
        std::vector<double> ref = oracle::reach_probabilities(rows, target);

        SolverOptions vi;
        vi.cross_check = true;
        PathValues a = until_probabilities(d, std::vector<bool>(d.size(), true), target, vi);
        SolverOptions direct;
        direct.prefer_direct = true;
        PathValues b = until_probabilities(d, std::vector<bool>(d.size(), true), target, direct);
        for (std::size_t s = 0; s < d.size(); ++s) {
            CHECK(std::abs(a.values[s] - ref[s]) < 1e-6);
            CHECK(std::abs(b.values[s] - ref[s]) < 1e-9);
        }
        if (a.method == SolveMethod::value_iteration) {
            REQUIRE(a.cross_check_deviation.has_value());
            CHECK(*a.cross_check_deviation < 1e-6);
        }
    }
}

TEST_CASE("qualitative sets match reachability") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        oracle::Rows rows = oracle::random_rows(20, 3, rng);
        std::vector<bool> target(rows.size(), false);
        target[rows.size() - 1] = true;
        InducedDtmc d = oracle::chain_of(rows, target, "t");
        QualitativeSets q = qualitative_sets(d, std::vector<bool>(d.size(), true), target);
        std::vector<bool> reach = oracle::can_reach(rows, target);
        std::vector<double> ref = oracle::reach_probabilities(rows, target);
        for (std::size_t s = 0; s < d.size(); ++s) {
            CHECK(q.prob0[s] == !reach[s]);
            if (q.prob1[s]) CHECK(ref[s] == doctest::Approx(1.0).epsilon(1e-9));
            if (!q.prob1[s] && !q.prob0[s]) CHECK(ref[s] < 1.0 - 1e-12);
        }
    }
}

TEST_CASE("bounded reachability is monotone in the bound and converges") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        oracle::Rows rows = oracle::random_rows(15, 3, rng);
        std::vector<bool> target(rows.size(), false);
        target[3] = true;
        InducedDtmc d = oracle::chain_of(rows, target, "t");
        std::vector<bool> all(d.size(), true);
        double previous = -1.0;
        for (std::uint64_t k = 0; k <= 30; ++k) {
            double v = bounded_until_probabilities(d, all, target, k).values[0];
            CHECK(v >= previous - 1e-15);
            CHECK(std::abs(v - oracle::bounded_reach_forward(rows, target, 0, k)) < 1e-12);
            previous = v;
        }
        double unbounded = until_probabilities(d, all, target).values[0];
        CHECK(previous <= unbounded + 1e-9);
        CHECK(std::abs(bounded_until_probabilities(d, all, target, 5000).values[0] - unbounded) < 1e-6);
    }
}

TEST_CASE("eventually and globally complement each other") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        oracle::Rows rows = oracle::random_rows(15, 3, rng);
        std::vector<bool> target(rows.size(), false);
        target[rows.size() - 2] = true;
        InducedDtmc d = oracle::chain_of(rows, target, "t");
        double f = check(d, parse_property("P=? [ F \"t\" ]")).value;
        double g = check(d, parse_property("P=? [ G !\"t\" ]")).value;
        CHECK(std::abs(f + g - 1.0) < 1e-9);
        for (unsigned k : {0U, 3U, 9U}) {
            std::string b = std::to_string(k);
            double fk = check(d, parse_property("P=? [ F<=" + b + " \"t\" ]")).value;
            double gk = check(d, parse_property("P=? [ G<=" + b + " !\"t\" ]")).value;
            CHECK(std::abs(fk + gk - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("values stay in [0, 1]") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        oracle::Rows rows = oracle::random_rows(30, 4, rng);
        std::vector<bool> target(rows.size(), false);
        target[1] = true;
        InducedDtmc d = oracle::chain_of(rows, target, "t");
        for (double v : check(d, parse_property("P=? [ F \"t\" ]")).state_values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}
