#include <random>

#include "doctest.h"
#include "reachkit/oracle.hpp"
#include "reachkit/reductions.hpp"
#include "reachkit/testgen.hpp"
#include "reachkit/verifier.hpp"

using namespace reachkit;

namespace {

Specification single_le(VarSpace space, const Rational& bound) {
    Specification spec(space);
    LinearTerm t;
    t.add(0, rat(1));
    spec.add_le(t, bound);
    return spec;
}

Specification single_ge(VarSpace space, const Rational& bound) {
    Specification spec(space);
    LinearTerm t;
    t.add(0, rat(1));
    spec.add_ge(t, bound);
    return spec;
}

ReachInstance relu_box(const Rational& in_lo_or_hi, bool upper, const Rational& out_ge) {
    Network net(1, {{Node{{rat(1)}, rat(0), PWLFunction::relu()}}});
    Specification in = upper ? single_le(VarSpace::Input, in_lo_or_hi)
                             : single_ge(VarSpace::Input, in_lo_or_hi);
    return ReachInstance(std::move(net), std::move(in), single_ge(VarSpace::Output, out_ge));
}

}  // namespace

TEST_CASE("trivially unreachable and reachable relu boxes") {
    // ReLU output is 0 for x <= -1, so y >= 1 cannot be met
    ReachResult blocked = decide(relu_box(rat(-1), true, rat(1)));
    CHECK_FALSE(blocked.reachable);

    ReachResult open = decide(relu_box(rat(2), false, rat(1)));
    REQUIRE(open.reachable);
    CHECK(check_witness(relu_box(rat(2), false, rat(1)), open.witness));
    CHECK(open.witness_bits == vector_bits(open.witness));

    Network net(1, {{Node{{rat(1)}, rat(0), PWLFunction::relu()}}});
    ReachInstance bottom(std::move(net), Specification::top(VarSpace::Input),
                         Specification::bottom(VarSpace::Output));
    CHECK_FALSE(decide(bottom).reachable);
}

TEST_CASE("check_witness evaluates both specifications exactly") {
    ReachInstance instance = relu_box(rat(2), false, rat(1));
    CHECK(check_witness(instance, {rat(2)}));
    CHECK_FALSE(check_witness(instance, {rat(0)}));
    CHECK_THROWS(check_witness(instance, {rat(0), rat(1)}));

    Network net(2, {{Node{{rat(1), rat(0)}, rat(0), PWLFunction::identity()}}});
    ReachInstance trivial(std::move(net), Specification::top(VarSpace::Input),
                          Specification::top(VarSpace::Output));
    CHECK(check_witness(trivial, {rat(5), rat(-17, 3)}));
}

TEST_CASE("witness size report") {
    ReachResult result;
    result.reachable = true;
    result.witness = {rat(0), rat(1), rat(0)};
    result.witness_bits = vector_bits(result.witness);
    CHECK(result.witness_bits == 6);  // each of 0/1, 1/1, 0/1 is two bits

    ReachInstance instance = relu_box(rat(2), false, rat(1));
    WitnessSizeReport report = witness_size_report(result, instance);
    CHECK(report.witness_bits == 6);
    CHECK(report.instance_bits == instance_size_bits(instance));
    CHECK(vector_bits({rat(3, 2)}) == 4);

    ReachResult unreachable;
    CHECK_THROWS(witness_size_report(unreachable, instance));
}

TEST_CASE("agreement with exhaustive phase enumeration on random instances") {
    std::mt19937_64 rng(1001);
    int decided_reachable = 0, decided_unreachable = 0;
    for (int round = 0; round < 120; ++round) {
        ReachInstance instance = random_instance(rng);
        BruteforceResult expected = reach_bruteforce(instance, std::size_t(1) << 14);
        ReachResult actual = decide(instance);
        CHECK(actual.reachable == expected.reachable);
        if (actual.reachable) {
            CHECK(check_witness(instance, actual.witness));
            ++decided_reachable;
        } else {
            ++decided_unreachable;
        }
    }
    // the corpus must exercise both verdicts to mean anything
    CHECK(decided_reachable > 10);
    CHECK(decided_unreachable > 10);
}

TEST_CASE("pruning never loses a verdict: compare against unpruned search") {
    // Disabling pruning is simulated by brute-force enumeration of complete
    // phase vectors, which explores exactly the leaves the pruned search may
    // skip.
    std::mt19937_64 rng(2002);
    RandomNetworkOptions options;
    options.max_nodes = 5;
    for (int round = 0; round < 60; ++round) {
        ReachInstance instance = random_instance(rng, options);
        CHECK(decide(instance).reachable == reach_bruteforce(instance).reachable);
    }
}

TEST_CASE("determinism: same instance and config give the same witness") {
    std::mt19937_64 rng(3003);
    for (int round = 0; round < 20; ++round) {
        ReachInstance instance = random_instance(rng);
        ReachResult a = decide(instance);
        ReachResult b = decide(instance);
        CHECK(a.reachable == b.reachable);
        CHECK(a.witness == b.witness);
        CHECK(a.phase == b.phase);
    }
}

TEST_CASE("worker count changes neither verdict nor witness") {
    std::mt19937_64 rng(4004);
    VerifierConfig two;
    two.workers = 2;
    VerifierConfig four;
    four.workers = 4;
    for (int round = 0; round < 25; ++round) {
        ReachInstance instance = random_instance(rng);
        ReachResult seq = decide(instance);
        ReachResult par2 = decide(instance, two);
        ReachResult par4 = decide(instance, four);
        CHECK(seq.reachable == par2.reachable);
        CHECK(seq.reachable == par4.reachable);
        CHECK(seq.witness == par2.witness);
        CHECK(seq.witness == par4.witness);
    }
}

TEST_CASE("budget exhaustion is an error, not a verdict") {
    // Unsatisfiable formula: the search cannot finish within one node.
    CnfFormula contradiction{
        1,
        {{{{0, true}, {0, true}, {0, true}}}, {{{0, false}, {0, false}, {0, false}}}}};
    GeneratedInstance generated = reduce_general(contradiction);
    VerifierConfig config;
    config.node_budget = 1;
    CHECK_THROWS_AS(decide(generated.instance, config), BudgetExceeded);
    VerifierConfig timed;
    timed.time_budget_ms = 0;
    CHECK_THROWS_AS(decide(generated.instance, timed), BudgetExceeded);
}

TEST_CASE("strict mode flag solves continuous instances identically") {
    std::mt19937_64 rng(6006);
    VerifierConfig strict;
    strict.force_strict = true;
    for (int round = 0; round < 25; ++round) {
        ReachInstance instance = random_instance(rng);
        CHECK(decide(instance).reachable == decide(instance, strict).reachable);
    }
}

TEST_CASE("stats are populated") {
    ReachResult result = decide(relu_box(rat(2), false, rat(1)));
    CHECK(result.stats.nodes_explored >= 1);
    CHECK(result.stats.lp_calls >= 1);
    CHECK(result.stats.wall_ms >= 0);
}
