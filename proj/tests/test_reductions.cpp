#include <random>
#include <set>

#include "doctest.h"
#include "reachkit/oracle.hpp"
#include "reachkit/reductions.hpp"
#include "reachkit/testgen.hpp"

using namespace reachkit;

namespace {

Rational g1(const Network& net, const Rational& x) { return net.eval({x})[0]; }

Rational g3(const Network& net, const Rational& a, const Rational& b, const Rational& c) {
    return net.eval({a, b, c})[0];
}

std::size_t max_relu_fanin(const Network& net) {
    std::size_t fanin = 0;
    for (const auto& layer : net.layers())
        for (const Node& node : layer) {
            if (!node.activation.is_relu()) continue;
            std::size_t nonzero = 0;
            for (const auto& w : node.weights)
                if (w != 0) ++nonzero;
            fanin = std::max(fanin, nonzero);
        }
    return fanin;
}

std::size_t max_fanin(const Network& net) {
    std::size_t fanin = 0;
    for (const auto& layer : net.layers())
        for (const Node& node : layer) {
            std::size_t nonzero = 0;
            for (const auto& w : node.weights)
                if (w != 0) ++nonzero;
            fanin = std::max(fanin, nonzero);
        }
    return fanin;
}

bool alphabet_within(const Network& net, const std::set<Rational>& allowed) {
    for (const auto& v : net.weight_alphabet())
        if (!allowed.count(v)) return false;
    return true;
}

bool has_hidden_identity(const Network& net) {
    for (std::size_t l = 0; l + 1 < net.layers().size(); ++l)
        for (const Node& node : net.layers()[l])
            if (node.activation.is_identity()) return true;
    return false;
}

const CnfFormula kPaperExample{
    4,
    {{{{0, true}, {1, true}, {2, true}}},
     {{{0, false}, {1, true}, {2, false}}},
     {{{1, false}, {2, true}, {3, true}}}}};

}  // namespace

TEST_CASE("dimacs parsing, padding and errors") {
    CnfFormula f = CnfFormula::parse_dimacs("c comment\np cnf 3 2\n1 -2 3 0\n2 0\n");
    CHECK(f.num_vars == 3);
    REQUIRE(f.clauses.size() == 2);
    CHECK(f.clauses[0][1].var == 1);
    CHECK_FALSE(f.clauses[0][1].positive);
    // short clause padded by repeating the last literal
    CHECK(f.clauses[1][0] == f.clauses[1][2]);

    CHECK_THROWS(CnfFormula::parse_dimacs("p cnf 2 1\n1 2 1 2 0\n"));
    CHECK_THROWS(CnfFormula::parse_dimacs("p cnf 2 1\n0\n"));
    CHECK_THROWS(CnfFormula::parse_dimacs("p cnf 2 1\n3 0\n"));
    CHECK_THROWS(CnfFormula::parse_dimacs("1 0\n"));
    CnfFormula back = CnfFormula::parse_dimacs(f.to_dimacs());
    CHECK(back.clauses == f.clauses);
}

TEST_CASE("boolean gadget lemma: not, or, and") {
    Network not_net = make_gadget(GadgetKind::Not);
    CHECK(g1(not_net, rat(1)) == rat(0));
    CHECK(g1(not_net, rat(0)) == rat(1));

    Network or_net = make_gadget(GadgetKind::Or3);
    CHECK(g3(or_net, rat(0), rat(0), rat(0)) == rat(0));
    for (int mask = 0; mask < 8; ++mask) {
        Rational a(mask & 1), b((mask >> 1) & 1), c((mask >> 2) & 1);
        Rational expected = mask ? 1 : 0;
        CHECK(g3(or_net, a, b, c) == expected);
    }

    for (std::size_t n : {1u, 3u, 5u}) {
        GadgetParams params;
        params.n = n;
        Network and_net = make_gadget(GadgetKind::AndN, params);
        for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
            RatVec input;
            Rational sum = 0;
            for (std::size_t i = 0; i < n; ++i) {
                input.push_back(rat((mask >> i) & 1));
                sum += input.back();
            }
            Rational out = and_net.eval(input)[0];
            CHECK(out == sum);
            CHECK((out == Rational(static_cast<long>(n))) ==
                  (mask + 1 == (std::size_t(1) << n)));
        }
    }
}

TEST_CASE("flawed bool gadget: the documented counterexample") {
    GadgetParams params;
    params.eps = rat(1, 10);
    Network bool_eps = make_gadget(GadgetKind::BoolEps, params);
    // for x = 2*eps the output is 0 even though x is far from {0, 1}
    CHECK(g1(bool_eps, rat(1, 5)) == rat(0));
    // and the whole [0,1] grid stays within [0, eps]
    for (int k = 0; k <= 100; ++k) {
        Rational out = g1(bool_eps, rat(k, 100));
        CHECK(out >= rat(0));
        CHECK(out <= rat(1, 10));
    }
    CHECK_THROWS(make_gadget(GadgetKind::BoolEps, GadgetParams{.eps = rat(0)}));
}

TEST_CASE("repaired bool gadget is zero exactly on {0,1}") {
    Network gadget = make_gadget(GadgetKind::BoolRepaired);
    CHECK(g1(gadget, rat(0)) == rat(0));
    CHECK(g1(gadget, rat(1)) == rat(0));
    CHECK(g1(gadget, rat(1, 4)) == rat(-1, 4));
    // piecewise closed form: -x below 1/2, x-1 from 1/2 on
    std::mt19937_64 rng(77);
    for (int i = 0; i < 100; ++i) {
        Rational x = random_small_rational(rng, 20, 7);
        Rational expected = x < rat(1, 2) ? Rational(-x) : Rational(x - 1);
        CHECK(g1(gadget, x) == expected);
        if (x != 0 && x != 1) CHECK(g1(gadget, x) != rat(0));
    }
}

TEST_CASE("restricted-weight gadget lemma, all cases, three parameter pairs") {
    const std::vector<std::pair<Rational, Rational>> params = {
        {rat(1), rat(1)}, {rat(3, 2), rat(2)}, {rat(1, 2), rat(1, 3)}};
    for (const auto& [c, d] : params) {
        CAPTURE(to_string(c));
        CAPTURE(to_string(d));
        GadgetParams p;
        p.c = c;
        p.d = d;

        Network discrete = make_gadget(GadgetKind::Discrete, p);
        // discrete(r) = 0 iff r = -d/c^2 or r = 1/c
        CHECK(g1(discrete, Rational(-d / (c * c))) == rat(0));
        CHECK(g1(discrete, Rational(1 / c)) == rat(0));
        CHECK(g1(discrete, rat(0)) == d);
        std::mt19937_64 rng(13);
        for (int i = 0; i < 50; ++i) {
            Rational r = random_small_rational(rng, 6, 5);
            if (r == Rational(-d / (c * c)) || r == Rational(1 / c)) continue;
            CHECK(g1(discrete, r) != rat(0));
        }
        CHECK(alphabet_within(discrete, {Rational(-c), rat(0), d}));

        Network inverse_eq = make_gadget(GadgetKind::InverseEq, p);
        // inverseeq(r1, r2) = 0 iff r1 = -r2
        for (int i = 0; i < 50; ++i) {
            Rational r1 = random_small_rational(rng, 6, 5);
            Rational r2 = random_small_rational(rng, 6, 5);
            Rational out = inverse_eq.eval({r1, r2})[0];
            CHECK((out == 0) == (r1 == Rational(-r2)));
        }
        CHECK(alphabet_within(inverse_eq, {Rational(-c), rat(0), d}));

        Network norm = make_gadget(GadgetKind::Norm, p);
        CHECK(g1(norm, Rational(-d / (c * c))) == rat(0));
        CHECK(g1(norm, Rational(1 / c)) == Rational(-d * c));
        CHECK(alphabet_within(norm, {Rational(-c), rat(0), d}));

        Network norm_not = make_gadget(GadgetKind::NormNot, p);
        CHECK(g1(norm_not, Rational(d / (c * c))) == Rational(-d * c));
        CHECK(g1(norm_not, Rational(-1 / c)) == rat(0));
        CHECK(alphabet_within(norm_not, {Rational(-c), rat(0), d}));

        const Rational dc4 = d * c * c * c * c;
        Network or_le = make_gadget(GadgetKind::OrLeOne, p);
        Network or_geq = make_gadget(GadgetKind::OrGeqOne, p);
        CHECK(g3(or_le, rat(0), rat(0), rat(0)) == Rational(dc4 - dc4 * c));
        CHECK(g3(or_geq, rat(0), rat(0), rat(0)) == Rational(dc4 - d * c * c * c));

        // on inputs from {-dc, 0} with at least one -dc the respective
        // variant outputs d*c^4
        const Rational t = Rational(-d * c);
        for (int mask = 1; mask < 8; ++mask) {
            RatVec input = {mask & 1 ? t : rat(0), (mask >> 1) & 1 ? t : rat(0),
                            (mask >> 2) & 1 ? t : rat(0)};
            if (c < 1) CHECK(or_le.eval(input)[0] == dc4);
            if (c >= 1) CHECK(or_geq.eval(input)[0] == dc4);
        }
    }
}

TEST_CASE("pure-relu or gadget matches the boolean or on the cube") {
    Network or_prime = make_gadget(GadgetKind::OrPrime);
    Network or3 = make_gadget(GadgetKind::Or3);
    CHECK(g3(or_prime, rat(0), rat(0), rat(0)) == rat(0));
    CHECK(g3(or_prime, rat(1), rat(0), rat(0)) == rat(1));
    for (int mask = 0; mask < 8; ++mask) {
        RatVec input = {rat(mask & 1), rat((mask >> 1) & 1), rat((mask >> 2) & 1)};
        CHECK(or_prime.eval(input) == or3.eval(input));
    }
}

TEST_CASE("general reduction on the paper example") {
    GeneratedInstance generated = reduce_general(kPaperExample);
    const Network& net = generated.instance.network;
    CHECK(net.input_dim() == 4);
    CHECK(net.output_dim() == 5);  // z0..z3, y
    CHECK(generated.instance.input_spec.simple());
    CHECK(generated.instance.output_spec.simple());
    CHECK(generated.name_map.output_names.at("y") == 4);

    // all-true satisfies the formula; y must hit the clause count
    RatVec input = generated.encode_assignment({true, true, true, true});
    RatVec output = net.eval(input);
    for (int i = 0; i < 4; ++i) CHECK(output[static_cast<std::size_t>(i)] == rat(0));
    CHECK(output[4] == rat(3));
    CHECK(generated.instance.output_spec.check(output));

    // non-boolean inputs are rejected by the z constraints
    RatVec half(4, rat(1, 2));
    CHECK_FALSE(generated.instance.output_spec.check(net.eval(half)));
}

TEST_CASE("identity elimination preserves the function exactly") {
    Network id_net(1, {{Node{{rat(1)}, rat(0), PWLFunction::identity()}},
                       {Node{{rat(1)}, rat(0), PWLFunction::identity()}}});
    Network transformed = to_relu_only(id_net);
    CHECK_FALSE(has_hidden_identity(transformed));
    CHECK(transformed.depth() == id_net.depth());
    for (const Rational& x : {rat(-5), rat(0), rat(7, 2)})
        CHECK(transformed.eval({x}) == id_net.eval({x}));

    GeneratedInstance generated = reduce_general(kPaperExample);
    Network relu_net = to_relu_only(generated.instance.network);
    CHECK_FALSE(has_hidden_identity(relu_net));
    CHECK(relu_net.depth() == generated.instance.network.depth());
    std::mt19937_64 rng(55);
    for (int i = 0; i < 100; ++i) {
        RatVec input;
        for (std::size_t j = 0; j < relu_net.input_dim(); ++j)
            input.push_back(random_small_rational(rng, 10, 6));
        CHECK(relu_net.eval(input) == generated.instance.network.eval(input));
    }
    // widths at most doubled
    for (std::size_t l = 0; l < relu_net.layers().size(); ++l)
        CHECK(relu_net.layers()[l].size() <= 2 * generated.instance.network.layers()[l].size());

    Network bad(1, {{Node{{rat(1)}, rat(0),
                          PWLFunction({{rat(0), rat(1)}, {rat(1), rat(0)}}, {rat(2)})}},
                    {Node{{rat(1)}, rat(0), PWLFunction::identity()}}});
    CHECK_THROWS(to_relu_only(bad));
}

TEST_CASE("single-layer reduction structure and boolean semantics") {
    GeneratedInstance generated = reduce_single_layer(kPaperExample);
    const Network& net = generated.instance.network;
    REQUIRE(net.layers().size() == 2);
    CHECK(net.layers()[0].size() == 2 * 4 + 3);  // 2n + m
    CHECK(net.output_dim() == 1);
    CHECK(generated.instance.input_spec.simple());
    CHECK(generated.instance.output_spec.simple());

    // satisfying assignment lands exactly on y = n/2
    RatVec output = net.eval(generated.encode_assignment({true, true, true, true}));
    CHECK(output[0] == rat(2));

    // interior inputs stay strictly below n/2
    std::mt19937_64 rng(66);
    for (int i = 0; i < 50; ++i) {
        RatVec input;
        for (int j = 0; j < 4; ++j) {
            std::uniform_int_distribution<long> num(1, 15);
            input.push_back(rat(num(rng), 16));
        }
        CHECK(net.eval(input)[0] < rat(2));
    }
}

TEST_CASE("fanin1 reduction structure") {
    std::mt19937_64 rng(88);
    for (int round = 0; round < 10; ++round) {
        CnfFormula formula = random_formula(rng, 4, 6);
        GeneratedInstance generated = reduce_fanin1(formula);
        CHECK(max_relu_fanin(generated.instance.network) <= 1);
        CHECK(generated.instance.network.output_dim() == formula.num_clauses() + 1);
        CHECK(generated.instance.input_spec.simple());
        CHECK(generated.instance.output_spec.simple());
    }
}

TEST_CASE("fanin2 reduction structure") {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 10; ++round) {
        CnfFormula formula = random_formula(rng, 4, 6);
        GeneratedInstance generated = reduce_fanin2(formula);
        const Network& net = generated.instance.network;
        CHECK(max_fanin(net) <= 2);
        CHECK_FALSE(has_hidden_identity(net));
        for (const auto& layer : net.layers())
            for (const Node& node : layer) CHECK(node.activation.is_relu());
        CHECK(generated.instance.output_spec.simple());
    }
}

TEST_CASE("restricted-weight reduction: alphabet, layers, canonical solution") {
    const std::vector<std::pair<Rational, Rational>> params = {
        {rat(1), rat(1)}, {rat(3, 2), rat(2)}, {rat(1, 2), rat(1, 3)}};
    for (const auto& [c, d] : params) {
        CAPTURE(to_string(c));
        GeneratedInstance generated = reduce_restricted_weights(kPaperExample, c, d);
        const Network& net = generated.instance.network;
        CHECK(alphabet_within(net, {Rational(-c), rat(0), d}));
        CHECK(net.depth() == 8);
        CHECK(net.input_dim() == 8);    // x_i and xbar_i
        CHECK(net.output_dim() == 9);   // z_i, e_i, y
        CHECK(generated.instance.input_spec.simple());
        CHECK(generated.instance.output_spec.simple());

        RatVec input = generated.encode_assignment({true, true, true, true});
        RatVec output = net.eval(input);
        for (std::size_t i = 0; i < 8; ++i) CHECK(output[i] == rat(0));
        CHECK(output[8] == Rational(3 * d * d * c * c * c * c));
        CHECK(generated.instance.output_spec.check(output));
    }
}

TEST_CASE("no-zero reduction: alphabet, output scale, non-simple inputs") {
    for (const Rational& c : {rat(1), rat(2), rat(1, 2)}) {
        CAPTURE(to_string(c));
        GeneratedInstance generated = reduce_no_zero(kPaperExample, c);
        const Network& net = generated.instance.network;
        CHECK(alphabet_within(net, {Rational(-c), c}));
        CHECK_FALSE(generated.instance.input_spec.simple());
        CHECK(generated.instance.output_spec.simple());

        RatVec input = generated.encode_assignment({true, true, true, true});
        CHECK(generated.instance.input_spec.check(input));
        RatVec output = net.eval(input);
        for (std::size_t i = 0; i < 4; ++i) CHECK(output[i] == rat(0));
        Rational expected = rat(128) * 3;
        for (int k = 0; k < 6; ++k) expected *= c;
        CHECK(output[4] == expected);  // y = 2^7 (m c^6)
        CHECK(generated.instance.output_spec.check(output));
    }
}

TEST_CASE("no-zero transform scales the base network by 2^7") {
    std::mt19937_64 rng(123);
    const Rational c = rat(1, 2);
    CnfFormula formula = random_formula(rng, 3, 3);
    GeneratedInstance nz = reduce_no_zero(formula, c);
    GeneratedInstance base = reduce_restricted_weights(formula, c, c);
    const std::size_t n = formula.num_vars;

    for (int round = 0; round < 20; ++round) {
        // arbitrary inputs satisfying the pairing/pinning constraints
        std::vector<bool> assignment(n);
        RatVec nz_input = nz.encode_assignment(assignment);
        for (std::size_t i = 0; i < n; ++i) {
            nz_input[i] = random_small_rational(rng, 5, 3);
            nz_input[n + i] = -nz_input[i];
        }
        REQUIRE(nz.instance.input_spec.check(nz_input));

        RatVec base_input(nz_input.begin(), nz_input.begin() + static_cast<long>(2 * n));
        RatVec base_out = base.instance.network.eval(base_input);
        RatVec nz_out = nz.instance.network.eval(nz_input);
        REQUIRE(nz_out.size() == n + 1);
        // base outputs are z_0..z_{n-1}, e_0..e_{n-1}, y; the transform drops e
        for (std::size_t i = 0; i < n; ++i)
            CHECK(nz_out[i] == Rational(rat(128) * base_out[i]));
        CHECK(nz_out[n] == Rational(rat(128) * base_out[2 * n]));
    }
}

TEST_CASE("reduction sizes grow linearly in the formula") {
    auto chain_formula = [](std::size_t n) {
        CnfFormula f;
        f.num_vars = n;
        for (std::size_t i = 0; i < n; ++i)
            f.clauses.push_back({Literal{i, true}, Literal{(i + 1) % n, false},
                                 Literal{(i + 2) % n, true}});
        return f;
    };
    auto sizes = [&](auto reduce) {
        std::vector<std::size_t> out;
        for (std::size_t n = 3; n <= 7; ++n)
            out.push_back(reduce(chain_formula(n)).instance.network.node_count());
        return out;
    };
    auto check_linear = [](const std::vector<std::size_t>& sizes) {
        for (std::size_t i = 1; i < sizes.size(); ++i) CHECK(sizes[i] > sizes[i - 1]);
        // constant second differences = exactly linear growth in n
        for (std::size_t i = 2; i < sizes.size(); ++i)
            CHECK(sizes[i] - sizes[i - 1] == sizes[i - 1] - sizes[i - 2]);
    };
    check_linear(sizes([](const CnfFormula& f) { return reduce_general(f); }));
    check_linear(sizes([](const CnfFormula& f) { return reduce_single_layer(f); }));
    check_linear(sizes([](const CnfFormula& f) { return reduce_fanin1(f); }));
    check_linear(
        sizes([](const CnfFormula& f) { return reduce_restricted_weights(f, rat(3, 2), rat(2)); }));
    check_linear(sizes([](const CnfFormula& f) { return reduce_no_zero(f, rat(1)); }));

    // fanin2 cannot be linear: the z outputs must ride fan-in-1 passes
    // through the accumulation layers, giving Theta(n*m) nodes. Monotone and
    // quadratically bounded is the honest statement.
    std::vector<std::size_t> f2 = sizes([](const CnfFormula& f) { return reduce_fanin2(f); });
    for (std::size_t i = 1; i < f2.size(); ++i) CHECK(f2[i] > f2[i - 1]);
    for (std::size_t i = 0; i < f2.size(); ++i) {
        const std::size_t n = 3 + i, m = n;
        CHECK(f2[i] <= 8 * (n + 2) * (m + 2));
    }
}

TEST_CASE("generated instance files round trip") {
    GeneratedInstance generated = reduce_restricted_weights(kPaperExample, rat(3, 2), rat(2));
    InstanceFiles files = write_instance(generated, "/tmp/reachkit_test_instance");
    GeneratedInstance back = read_instance(files);
    CHECK(back.reduction_tag == "weights");
    CHECK(back.instance.network.to_json() == generated.instance.network.to_json());
    CHECK(back.instance.input_spec == generated.instance.input_spec);
    CHECK(back.instance.output_spec == generated.instance.output_spec);
    CHECK(back.name_map.output_names == generated.name_map.output_names);
    REQUIRE(back.c.has_value());
    CHECK(*back.c == rat(3, 2));
}
