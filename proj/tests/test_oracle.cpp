#include <random>

#include "doctest.h"
#include "reachkit/oracle.hpp"
#include "reachkit/testgen.hpp"

using namespace reachkit;

namespace {

const CnfFormula kPaperExample{
    4,
    {{{{0, true}, {1, true}, {2, true}}},
     {{{0, false}, {1, true}, {2, false}}},
     {{{1, false}, {2, true}, {3, true}}}}};

CnfFormula unit_clause(bool positive) {
    return CnfFormula{1, {{{{0, positive}, {0, positive}, {0, positive}}}}};
}

}  // namespace

TEST_CASE("sat bruteforce basics") {
    SatResult pos = sat_bruteforce(unit_clause(true));
    REQUIRE(pos.satisfiable);
    CHECK((*pos.assignment)[0] == true);

    CnfFormula contradiction = unit_clause(true);
    contradiction.clauses.push_back({Literal{0, false}, Literal{0, false}, Literal{0, false}});
    CHECK_FALSE(sat_bruteforce(contradiction).satisfiable);

    CHECK(sat_bruteforce(kPaperExample).satisfiable);

    CnfFormula big;
    big.num_vars = 25;
    big.clauses.push_back({Literal{0, true}, Literal{1, true}, Literal{2, true}});
    CHECK_THROWS(sat_bruteforce(big));
}

TEST_CASE("reach bruteforce on the relu box examples") {
    Network net(1, {{Node{{rat(1)}, rat(0), PWLFunction::relu()}}});
    Specification in(VarSpace::Input);
    LinearTerm t;
    t.add(0, rat(1));
    in.add_ge(t, rat(2));
    Specification out(VarSpace::Output);
    LinearTerm u;
    u.add(0, rat(1));
    out.add_ge(u, rat(1));
    ReachInstance instance(net, in, out);
    BruteforceResult res = reach_bruteforce(instance);
    REQUIRE(res.reachable);
    CHECK(res.phase.choices == std::vector<std::size_t>{1});
    CHECK(check_witness(instance, res.witness));

    ReachInstance blocked(net, Specification::top(VarSpace::Input),
                          Specification::bottom(VarSpace::Output));
    CHECK_FALSE(reach_bruteforce(blocked).reachable);
}

TEST_CASE("phase cap is a hard error") {
    std::mt19937_64 rng(42);
    RandomNetworkOptions options;
    options.max_nodes = 8;
    options.allow_general_pwl = false;
    ReachInstance instance = random_instance(rng, options);
    if (instance.network.node_count() >= 3)
        CHECK_THROWS(reach_bruteforce(instance, 4));
}

TEST_CASE("bruteforce agrees with decide on a seeded corpus") {
    std::mt19937_64 rng(2112);
    for (int round = 0; round < 60; ++round) {
        ReachInstance instance = random_instance(rng);
        CHECK(reach_bruteforce(instance).reachable == decide(instance).reachable);
    }
}

TEST_CASE("boolean grid check certifies the discrete half of each reduction") {
    std::mt19937_64 rng(321);
    for (int round = 0; round < 8; ++round) {
        CnfFormula formula = random_formula(rng, 4, 5);
        for (int which = 0; which < 6; ++which) {
            GeneratedInstance generated =
                which == 0   ? reduce_general(formula)
                : which == 1 ? reduce_single_layer(formula)
                : which == 2 ? reduce_fanin1(formula)
                : which == 3 ? reduce_fanin2(formula)
                : which == 4 ? reduce_restricted_weights(formula, rat(3, 2), rat(2))
                             : reduce_no_zero(formula, rat(1));
            GridCheckReport report = boolean_grid_check(generated, formula);
            CAPTURE(generated.reduction_tag);
            CAPTURE(report.first_mismatch);
            CHECK(report.consistent);
            CHECK(report.assignments_checked == (std::size_t(1) << formula.num_vars));
            CHECK((report.satisfying > 0) == sat_bruteforce(formula).satisfiable);
        }
    }
}

TEST_CASE("grid check on the relu-only transformed general reduction") {
    GeneratedInstance generated = reduce_general(kPaperExample);
    generated.instance = ReachInstance(to_relu_only(generated.instance.network),
                                       generated.instance.input_spec,
                                       generated.instance.output_spec);
    GridCheckReport report = boolean_grid_check(generated, kPaperExample);
    CHECK(report.consistent);
}

TEST_CASE("grid check cap") {
    CnfFormula formula;
    formula.num_vars = 22;
    formula.clauses.push_back({Literal{0, true}, Literal{1, true}, Literal{2, true}});
    GeneratedInstance generated = reduce_single_layer(formula);
    CHECK_THROWS(boolean_grid_check(generated, formula));
}
