#include "reachkit/testgen.hpp"

#include <algorithm>
#include <set>

namespace reachkit {

Rational random_small_rational(std::mt19937_64& rng, long num_range, long max_den) {
    std::uniform_int_distribution<long> num(-num_range, num_range);
    std::uniform_int_distribution<long> den(1, max_den);
    return rat(num(rng), den(rng));
}

namespace {

PWLFunction random_activation(std::mt19937_64& rng, const RandomNetworkOptions& options) {
    std::uniform_int_distribution<int> kind(0, 9);
    const int k = kind(rng);
    if (k < 5 || !options.allow_general_pwl) return PWLFunction::relu();
    if (k < 7) return PWLFunction::identity();

    std::uniform_int_distribution<int> piece_count(2, 3);
    const int pieces = piece_count(rng);
    std::set<Rational> points;
    while (points.size() + 1 < static_cast<std::size_t>(pieces))
        points.insert(random_small_rational(rng, 3, 2));
    RatVec breakpoints(points.begin(), points.end());

    std::vector<PWLFunction::Piece> parts;
    for (int p = 0; p < pieces; ++p)
        parts.push_back({random_small_rational(rng, 2, 2), random_small_rational(rng, 2, 2)});
    if (!options.allow_discontinuous) {
        // Stitch intercepts so adjacent pieces agree at each breakpoint.
        for (std::size_t j = 0; j + 1 < parts.size(); ++j) {
            const Rational left = parts[j].first * breakpoints[j] + parts[j].second;
            parts[j + 1].second = left - parts[j + 1].first * breakpoints[j];
        }
    }
    return PWLFunction(std::move(parts), std::move(breakpoints));
}

}  // namespace

Network random_network(std::mt19937_64& rng, const RandomNetworkOptions& options) {
    std::uniform_int_distribution<std::size_t> input_dist(1, options.max_inputs);
    const std::size_t inputs = input_dist(rng);
    std::uniform_int_distribution<std::size_t> layer_dist(1, options.max_layers);
    const std::size_t layer_count = layer_dist(rng);

    // Split a node budget across the layers, at least one node each.
    std::uniform_int_distribution<std::size_t> node_dist(layer_count, options.max_nodes);
    std::size_t remaining = node_dist(rng);
    std::vector<std::size_t> widths;
    for (std::size_t l = 0; l < layer_count; ++l) {
        const std::size_t layers_left = layer_count - l;
        std::uniform_int_distribution<std::size_t> width_dist(
            1, remaining - (layers_left - 1));
        const std::size_t w = l + 1 == layer_count ? remaining : width_dist(rng);
        widths.push_back(w);
        remaining -= w;
    }

    std::vector<std::vector<Node>> layers;
    std::size_t prev = inputs;
    for (std::size_t w : widths) {
        std::vector<Node> nodes;
        for (std::size_t i = 0; i < w; ++i) {
            Node node{RatVec(), random_small_rational(rng), random_activation(rng, options)};
            for (std::size_t j = 0; j < prev; ++j)
                node.weights.push_back(random_small_rational(rng));
            nodes.push_back(std::move(node));
        }
        layers.push_back(std::move(nodes));
        prev = w;
    }
    return Network(inputs, std::move(layers));
}

ReachInstance random_instance(std::mt19937_64& rng, const RandomNetworkOptions& options) {
    Network network = random_network(rng, options);

    std::vector<std::pair<Rational, Rational>> box;
    for (std::size_t i = 0; i < network.input_dim(); ++i) {
        Rational a = random_small_rational(rng, 4, 2);
        Rational b = random_small_rational(rng, 4, 2);
        if (b < a) std::swap(a, b);
        box.push_back({a, b});
    }
    Specification in_spec = Specification::box(VarSpace::Input, box);

    Specification out_spec(VarSpace::Output);
    std::uniform_int_distribution<int> coin(0, 2);
    for (std::size_t i = 0; i < network.output_dim(); ++i) {
        LinearTerm t;
        t.add(static_cast<int>(i), rat(1));
        const int kind = coin(rng);
        if (kind == 0) continue;  // leave this output unconstrained
        Rational bound = random_small_rational(rng, 6, 2);
        if (kind == 1)
            out_spec.add_le(t, bound);
        else
            out_spec.add_ge(t, bound);
    }
    return ReachInstance(std::move(network), std::move(in_spec), std::move(out_spec));
}

CnfFormula random_formula(std::mt19937_64& rng, std::size_t max_vars, std::size_t max_clauses) {
    std::uniform_int_distribution<std::size_t> var_dist(1, max_vars);
    const std::size_t n = var_dist(rng);
    std::uniform_int_distribution<std::size_t> clause_dist(1, max_clauses);
    const std::size_t m = clause_dist(rng);

    CnfFormula formula;
    formula.num_vars = n;
    std::uniform_int_distribution<std::size_t> lit_var(0, n - 1);
    std::uniform_int_distribution<int> polarity(0, 1);
    for (std::size_t j = 0; j < m; ++j) {
        std::array<Literal, 3> clause;
        for (auto& lit : clause) lit = {lit_var(rng), polarity(rng) == 1};
        formula.clauses.push_back(clause);
    }
    return formula;
}

std::vector<CnfFormula> exhaustive_formulas(std::size_t vars, std::size_t clauses) {
    // All literals over `vars` variables, in a fixed order.
    std::vector<Literal> literals;
    for (std::size_t v = 0; v < vars; ++v) {
        literals.push_back({v, true});
        literals.push_back({v, false});
    }
    std::sort(literals.begin(), literals.end());

    std::vector<std::array<Literal, 3>> all_clauses;
    for (std::size_t a = 0; a < literals.size(); ++a)
        for (std::size_t b = a; b < literals.size(); ++b)
            for (std::size_t c = b; c < literals.size(); ++c)
                all_clauses.push_back({literals[a], literals[b], literals[c]});

    std::vector<CnfFormula> formulas;
    std::vector<std::size_t> pick(clauses, 0);
    while (true) {
        CnfFormula formula;
        formula.num_vars = vars;
        for (std::size_t idx : pick) formula.clauses.push_back(all_clauses[idx]);
        formulas.push_back(std::move(formula));

        // Next non-decreasing index tuple.
        std::size_t pos = clauses;
        while (pos-- > 0) {
            if (pick[pos] + 1 < all_clauses.size()) {
                ++pick[pos];
                for (std::size_t q = pos + 1; q < clauses; ++q) pick[q] = pick[pos];
                break;
            }
            if (pos == 0) return formulas;
        }
    }
}

}  // namespace reachkit
