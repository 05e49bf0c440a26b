#include "reachkit/reductions.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace reachkit {

using nlohmann::json;

void CnfFormula::validate() const {
    if (num_vars == 0) throw std::invalid_argument("formula needs at least one variable");
    for (const auto& clause : clauses)
        for (const Literal& lit : clause)
            if (lit.var >= num_vars)
                throw std::invalid_argument("literal references undeclared variable");
}

CnfFormula CnfFormula::parse_dimacs(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    CnfFormula formula;
    bool have_header = false;
    std::size_t declared_clauses = 0;
    std::vector<long> pending;
    while (std::getline(in, line)) {
        std::istringstream tokens(line);
        std::string first;
        if (!(tokens >> first)) continue;
        if (first == "c") continue;
        if (first == "p") {
            std::string kind;
            if (!(tokens >> kind >> formula.num_vars >> declared_clauses) || kind != "cnf")
                throw std::invalid_argument("malformed DIMACS header");
            have_header = true;
            continue;
        }
        if (!have_header) throw std::invalid_argument("DIMACS clause before p-header");
        tokens.clear();
        tokens.str(line);
        long lit;
        while (tokens >> lit) {
            if (lit == 0) {
                if (pending.empty()) throw std::invalid_argument("empty DIMACS clause");
                if (pending.size() > 3)
                    throw std::invalid_argument("clause with more than 3 literals (strict 3SAT)");
                while (pending.size() < 3) pending.push_back(pending.back());
                std::array<Literal, 3> clause;
                for (std::size_t i = 0; i < 3; ++i) {
                    std::size_t var = static_cast<std::size_t>(std::abs(pending[i])) - 1;
                    clause[i] = {var, pending[i] > 0};
                }
                formula.clauses.push_back(clause);
                pending.clear();
            } else {
                if (static_cast<std::size_t>(std::abs(lit)) > formula.num_vars)
                    throw std::invalid_argument("literal exceeds declared variable count");
                pending.push_back(lit);
            }
        }
    }
    if (!pending.empty()) throw std::invalid_argument("unterminated DIMACS clause");
    if (formula.clauses.size() != declared_clauses)
        throw std::invalid_argument("DIMACS clause count does not match header");
    formula.validate();
    return formula;
}

CnfFormula CnfFormula::load_dimacs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open DIMACS file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dimacs(buf.str());
}

std::string CnfFormula::to_dimacs() const {
    std::ostringstream out;
    out << "p cnf " << num_vars << " " << clauses.size() << "\n";
    for (const auto& clause : clauses) {
        for (const Literal& lit : clause)
            out << (lit.positive ? "" : "-") << lit.var + 1 << " ";
        out << "0\n";
    }
    return out.str();
}

bool CnfFormula::satisfied_by(const std::vector<bool>& assignment) const {
    if (assignment.size() != num_vars)
        throw std::invalid_argument("assignment size does not match variable count");
    for (const auto& clause : clauses) {
        bool sat = false;
        for (const Literal& lit : clause)
            if (assignment[lit.var] == lit.positive) sat = true;
        if (!sat) return false;
    }
    return true;
}

namespace {

// Incremental layered-network builder. Edges may only point to the previous
// layer; parallel edges to the same node accumulate into one dense weight.
class NetBuilder {
public:
    struct Ref {
        std::size_t layer;
        std::size_t index;
    };

    explicit NetBuilder(std::size_t input_dim) : input_dim_(input_dim) {}

    Ref input(std::size_t i) const {
        if (i >= input_dim_) throw std::out_of_range("input index out of range");
        return {0, i};
    }

    std::size_t width(std::size_t layer) const {
        return layer == 0 ? input_dim_ : layers_.at(layer - 1).size();
    }

    std::size_t layer_count() const { return layers_.size(); }

    Ref add(std::size_t layer, const PWLFunction& activation,
            const std::vector<std::pair<Ref, Rational>>& edges, Rational bias) {
        if (layer == 0) throw std::invalid_argument("cannot add nodes to the input layer");
        if (layer > layers_.size() + 1) throw std::invalid_argument("layers must be added in order");
        if (layer == layers_.size() + 1) layers_.emplace_back();
        Spec spec{activation, std::move(bias), {}};
        for (const auto& [ref, weight] : edges) {
            if (ref.layer + 1 != layer)
                throw std::invalid_argument("edge does not point to the previous layer");
            spec.edges[ref.index] += weight;
        }
        layers_[layer - 1].push_back(std::move(spec));
        return {layer, layers_[layer - 1].size() - 1};
    }

    Network build() const {
        std::vector<std::vector<Node>> layers;
        std::size_t prev = input_dim_;
        for (const auto& specs : layers_) {
            std::vector<Node> nodes;
            for (const Spec& spec : specs) {
                Node node{RatVec(prev, Rational(0)), spec.bias, spec.activation};
                for (const auto& [idx, w] : spec.edges) node.weights[idx] = w;
                nodes.push_back(std::move(node));
            }
            layers.push_back(std::move(nodes));
            prev = layers.back().size();
        }
        return Network(input_dim_, std::move(layers));
    }

private:
    struct Spec {
        PWLFunction activation;
        Rational bias;
        std::map<std::size_t, Rational> edges;
    };

    std::size_t input_dim_;
    std::vector<std::vector<Spec>> layers_;
};

const PWLFunction& relu() { return PWLFunction::relu(); }
const PWLFunction& id() { return PWLFunction::identity(); }

Rational require_positive(const std::optional<Rational>& value, const std::string& name) {
    if (!value || *value <= 0)
        throw std::invalid_argument("gadget parameter " + name + " must be positive");
    return *value;
}

}  // namespace

Network make_gadget(GadgetKind kind, const GadgetParams& params) {
    switch (kind) {
        case GadgetKind::Not: {
            NetBuilder b(1);
            b.add(1, id(), {{b.input(0), rat(-1)}}, rat(1));
            return b.build();
        }
        case GadgetKind::Or3: {
            NetBuilder b(3);
            auto r = b.add(1, relu(),
                           {{b.input(0), rat(-1)}, {b.input(1), rat(-1)}, {b.input(2), rat(-1)}},
                           rat(1));
            b.add(2, id(), {{r, rat(-1)}}, rat(1));
            return b.build();
        }
        case GadgetKind::AndN: {
            if (params.n == 0) throw std::invalid_argument("and gadget needs positive fan-in");
            NetBuilder b(params.n);
            std::vector<std::pair<NetBuilder::Ref, Rational>> edges;
            for (std::size_t i = 0; i < params.n; ++i) edges.push_back({b.input(i), rat(1)});
            b.add(1, id(), edges, rat(0));
            return b.build();
        }
        case GadgetKind::BoolEps: {
            Rational eps = require_positive(params.eps, "eps");
            NetBuilder b(1);
            auto lo = b.add(1, relu(), {{b.input(0), rat(-1)}}, eps);
            auto hi = b.add(1, relu(), {{b.input(0), rat(1)}}, eps - 1);
            b.add(2, id(), {{lo, rat(1)}, {hi, rat(1)}}, rat(0));
            return b.build();
        }
        case GadgetKind::BoolRepaired: {
            NetBuilder b(1);
            auto lo = b.add(1, relu(), {{b.input(0), rat(-1)}}, rat(1, 2));
            auto hi = b.add(1, relu(), {{b.input(0), rat(1)}}, rat(-1, 2));
            b.add(2, id(), {{lo, rat(1)}, {hi, rat(1)}}, rat(-1, 2));
            return b.build();
        }
        case GadgetKind::Discrete: {
            Rational c = require_positive(params.c, "c");
            Rational d = require_positive(params.d, "d");
            NetBuilder b(1);
            auto neg = b.add(1, relu(), {{b.input(0), -c}}, rat(0));
            auto pos = b.add(1, relu(), {{b.input(0), d}}, rat(0));
            b.add(2, id(), {{neg, -c}, {pos, -c}}, d);
            return b.build();
        }
        case GadgetKind::InverseEq: {
            Rational c = require_positive(params.c, "c");
            NetBuilder b(2);
            b.add(1, id(), {{b.input(0), -c}, {b.input(1), -c}}, rat(0));
            return b.build();
        }
        case GadgetKind::Norm: {
            Rational c = require_positive(params.c, "c");
            Rational d = require_positive(params.d, "d");
            NetBuilder b(1);
            auto r = b.add(1, relu(), {{b.input(0), -c}}, rat(0));
            auto u = b.add(2, id(), {{r, -c}}, d);
            b.add(3, id(), {{u, -c}}, rat(0));
            return b.build();
        }
        case GadgetKind::NormNot: {
            Rational c = require_positive(params.c, "c");
            require_positive(params.d, "d");
            NetBuilder b(1);
            auto p = b.add(1, id(), {{b.input(0), -c}}, rat(0));
            auto r = b.add(2, relu(), {{p, -c}}, rat(0));
            b.add(3, id(), {{r, -c}}, rat(0));
            return b.build();
        }
        case GadgetKind::OrLeOne:
        case GadgetKind::OrGeqOne: {
            Rational c = require_positive(params.c, "c");
            Rational d = require_positive(params.d, "d");
            NetBuilder b(3);
            // Inputs ride plain identity chains up to the staging layer; the
            // constant chains can only be built from alphabet weights, which
            // fixes the staging depth.
            std::vector<NetBuilder::Ref> pass;
            for (std::size_t i = 0; i < 3; ++i) pass.push_back(b.input(i));
            for (std::size_t t = 1; t <= 3; ++t)
                for (std::size_t i = 0; i < 3; ++i)
                    pass[i] = b.add(t, id(), {{pass[i], rat(1)}}, rat(0));
            std::vector<std::pair<NetBuilder::Ref, Rational>> relu_edges;
            for (std::size_t i = 0; i < 3; ++i) {
                auto staged = b.add(4, id(), {{pass[i], -c}}, rat(0));
                relu_edges.push_back({staged, -c});
            }
            // Inner constant d*c^4 (two chain links shorter for d*c^2).
            std::size_t inner_head = kind == GadgetKind::OrLeOne ? 1 : 3;
            auto chain = b.add(inner_head, id(), {}, d);
            for (std::size_t t = inner_head + 1; t <= 4; ++t)
                chain = b.add(t, id(), {{chain, -c}}, rat(0));
            relu_edges.push_back({chain, -c});
            auto r = b.add(5, relu(), relu_edges, rat(0));
            // Outer constant d*c^4.
            auto outer = b.add(2, id(), {}, d);
            for (std::size_t t = 3; t <= 5; ++t) outer = b.add(t, id(), {{outer, -c}}, rat(0));
            b.add(6, id(), {{outer, -c}, {r, -c}}, rat(0));
            return b.build();
        }
        case GadgetKind::OrPrime: {
            NetBuilder b(3);
            auto r1 = b.add(1, relu(), {{b.input(0), rat(-1)}, {b.input(1), rat(-1)}}, rat(1));
            auto p = b.add(1, id(), {{b.input(2), rat(1)}}, rat(0));
            auto r2 = b.add(2, relu(), {{r1, rat(1)}, {p, rat(-1)}}, rat(0));
            b.add(3, relu(), {{r2, rat(-1)}}, rat(1));
            return b.build();
        }
    }
    throw std::invalid_argument("unknown gadget kind");
}

namespace {

// Shared piece of the unit-weight reductions: the literal value nodes
// id(x) / id(1-x) in the first layer, one per used (variable, polarity).
std::map<std::pair<std::size_t, bool>, NetBuilder::Ref> add_literal_nodes(
    NetBuilder& b, const CnfFormula& formula) {
    std::map<std::pair<std::size_t, bool>, NetBuilder::Ref> refs;
    for (const auto& clause : formula.clauses)
        for (const Literal& lit : clause) {
            auto key = std::make_pair(lit.var, lit.positive);
            if (refs.count(key)) continue;
            refs.emplace(key, lit.positive
                                  ? b.add(1, id(), {{b.input(lit.var), rat(1)}}, rat(0))
                                  : b.add(1, id(), {{b.input(lit.var), rat(-1)}}, rat(1)));
        }
    return refs;
}

RatVec boolean_input(const std::vector<bool>& assignment) {
    RatVec input;
    input.reserve(assignment.size());
    for (bool bit : assignment) input.push_back(bit ? rat(1) : rat(0));
    return input;
}

}  // namespace

GeneratedInstance reduce_general(const CnfFormula& formula) {
    formula.validate();
    const std::size_t n = formula.num_vars;
    const std::size_t m = formula.num_clauses();
    NetBuilder b(n);

    auto literal = add_literal_nodes(b, formula);
    std::vector<NetBuilder::Ref> bool_out;
    for (std::size_t i = 0; i < n; ++i) {
        auto lo = b.add(1, relu(), {{b.input(i), rat(-1)}}, rat(1, 2));
        auto hi = b.add(1, relu(), {{b.input(i), rat(1)}}, rat(-1, 2));
        bool_out.push_back(b.add(2, id(), {{lo, rat(1)}, {hi, rat(1)}}, rat(-1, 2)));
    }
    std::vector<NetBuilder::Ref> or_out;
    for (const auto& clause : formula.clauses) {
        std::vector<std::pair<NetBuilder::Ref, Rational>> edges;
        for (const Literal& lit : clause)
            edges.push_back({literal.at({lit.var, lit.positive}), rat(-1)});
        auto r = b.add(2, relu(), edges, rat(1));
        or_out.push_back(b.add(3, id(), {{r, rat(-1)}}, rat(1)));
    }
    std::vector<NetBuilder::Ref> bool_pass;
    for (std::size_t i = 0; i < n; ++i)
        bool_pass.push_back(b.add(3, id(), {{bool_out[i], rat(1)}}, rat(0)));

    NameMap names;
    Specification out_spec(VarSpace::Output);
    for (std::size_t i = 0; i < n; ++i) {
        b.add(4, id(), {{bool_pass[i], rat(1)}}, rat(0));
        names.output_names["z" + std::to_string(i)] = i;
        LinearTerm t;
        t.add(static_cast<int>(i), rat(1));
        out_spec.add_eq(t, rat(0));
    }
    std::vector<std::pair<NetBuilder::Ref, Rational>> and_edges;
    for (const auto& o : or_out) and_edges.push_back({o, rat(1)});
    b.add(4, id(), and_edges, rat(0));
    names.output_names["y"] = n;
    LinearTerm y;
    y.add(static_cast<int>(n), rat(1));
    out_spec.add_eq(y, Rational(static_cast<long>(m)));

    return {ReachInstance(b.build(), Specification::top(VarSpace::Input), std::move(out_spec)),
            std::move(names), "general", std::nullopt, std::nullopt};
}

GeneratedInstance reduce_single_layer(const CnfFormula& formula) {
    formula.validate();
    const std::size_t n = formula.num_vars;
    NetBuilder b(n);

    std::vector<std::pair<NetBuilder::Ref, Rational>> collect;
    for (std::size_t i = 0; i < n; ++i) {
        auto lo = b.add(1, relu(), {{b.input(i), rat(-1)}}, rat(1, 2));
        auto hi = b.add(1, relu(), {{b.input(i), rat(1)}}, rat(-1, 2));
        collect.push_back({lo, rat(1)});
        collect.push_back({hi, rat(1)});
    }
    for (const auto& clause : formula.clauses) {
        // ReLU(1 - sum of literal values), literal values folded into weights.
        std::vector<std::pair<NetBuilder::Ref, Rational>> edges;
        Rational bias = 1;
        for (const Literal& lit : clause) {
            if (lit.positive) {
                edges.push_back({b.input(lit.var), rat(-1)});
            } else {
                edges.push_back({b.input(lit.var), rat(1)});
                bias -= 1;
            }
        }
        collect.push_back({b.add(1, relu(), edges, bias), rat(-1)});
    }
    b.add(2, id(), collect, rat(0));

    NameMap names;
    names.output_names["y"] = 0;
    Specification out_spec(VarSpace::Output);
    LinearTerm y;
    y.add(0, rat(1));
    out_spec.add_eq(y, Rational(static_cast<long>(n)) / 2);

    std::vector<std::pair<Rational, Rational>> box(n, {rat(0), rat(1)});
    return {ReachInstance(b.build(), Specification::box(VarSpace::Input, box), std::move(out_spec)),
            std::move(names), "single-layer", std::nullopt, std::nullopt};
}

GeneratedInstance reduce_fanin1(const CnfFormula& formula) {
    formula.validate();
    const std::size_t n = formula.num_vars;
    const std::size_t m = formula.num_clauses();
    NetBuilder b(n);

    auto literal = add_literal_nodes(b, formula);
    std::vector<NetBuilder::Ref> bool_out;
    for (std::size_t i = 0; i < n; ++i) {
        auto lo = b.add(1, relu(), {{b.input(i), rat(-1)}}, rat(1, 2));
        auto hi = b.add(1, relu(), {{b.input(i), rat(1)}}, rat(-1, 2));
        bool_out.push_back(b.add(2, id(), {{lo, rat(1)}, {hi, rat(1)}}, rat(-1, 2)));
    }
    std::map<std::pair<std::size_t, bool>, NetBuilder::Ref> literal_pass;
    for (const auto& [key, ref] : literal)
        literal_pass.emplace(key, b.add(2, id(), {{ref, rat(1)}}, rat(0)));

    NameMap names;
    Specification out_spec(VarSpace::Output);
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<std::pair<NetBuilder::Ref, Rational>> edges;
        for (const Literal& lit : formula.clauses[j])
            edges.push_back({literal_pass.at({lit.var, lit.positive}), rat(1)});
        b.add(3, id(), edges, rat(0));
        names.output_names["y" + std::to_string(j)] = j;
        LinearTerm t;
        t.add(static_cast<int>(j), rat(1));
        out_spec.add_ge(t, rat(1));
    }
    std::vector<std::pair<NetBuilder::Ref, Rational>> z_edges;
    for (const auto& ref : bool_out) z_edges.push_back({ref, rat(1)});
    b.add(3, id(), z_edges, rat(0));
    names.output_names["z"] = m;
    LinearTerm z;
    z.add(static_cast<int>(m), rat(1));
    out_spec.add_eq(z, rat(0));

    // The inputs are boxed to [0,1]: the bool gadgets are non-positive there,
    // so z = 0 really does force every input to 0 or 1. Over unrestricted
    // inputs a positive bool value outside the box could cancel a negative
    // one inside it and the summed z constraint would lose its meaning.
    std::vector<std::pair<Rational, Rational>> box(n, {rat(0), rat(1)});
    return {ReachInstance(b.build(), Specification::box(VarSpace::Input, box), std::move(out_spec)),
            std::move(names), "fanin1", std::nullopt, std::nullopt};
}

GeneratedInstance reduce_fanin2(const CnfFormula& formula) {
    formula.validate();
    const std::size_t n = formula.num_vars;
    const std::size_t m = formula.num_clauses();
    if (m == 0) throw std::invalid_argument("fanin2 reduction needs at least one clause");
    NetBuilder b(n);

    std::vector<NetBuilder::Ref> zp(n), zn(n), o(m);
    std::vector<NetBuilder::Ref> first_stage(m), third_pass(m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto& clause = formula.clauses[j];
        std::vector<std::pair<NetBuilder::Ref, Rational>> edges;
        Rational bias = 1;
        for (std::size_t k = 0; k < 2; ++k) {
            if (clause[k].positive) {
                edges.push_back({b.input(clause[k].var), rat(-1)});
            } else {
                edges.push_back({b.input(clause[k].var), rat(1)});
                bias -= 1;
            }
        }
        first_stage[j] = b.add(1, relu(), edges, bias);
        third_pass[j] = clause[2].positive
                            ? b.add(1, relu(), {{b.input(clause[2].var), rat(1)}}, rat(0))
                            : b.add(1, relu(), {{b.input(clause[2].var), rat(-1)}}, rat(1));
    }
    std::vector<NetBuilder::Ref> alo(n), ahi(n);
    for (std::size_t i = 0; i < n; ++i) {
        alo[i] = b.add(1, relu(), {{b.input(i), rat(-1)}}, rat(1, 2));
        ahi[i] = b.add(1, relu(), {{b.input(i), rat(1)}}, rat(-1, 2));
    }
    std::vector<NetBuilder::Ref> second_stage(m);
    for (std::size_t j = 0; j < m; ++j)
        second_stage[j] = b.add(2, relu(), {{first_stage[j], rat(1)}, {third_pass[j], rat(-1)}},
                                rat(0));
    for (std::size_t i = 0; i < n; ++i) {
        zp[i] = b.add(2, relu(), {{alo[i], rat(1)}, {ahi[i], rat(1)}}, rat(-1, 2));
        zn[i] = b.add(2, relu(), {{alo[i], rat(-1)}, {ahi[i], rat(-1)}}, rat(1, 2));
    }

    const std::size_t last = std::max<std::size_t>(3, 2 + m);
    auto pass = [&](std::size_t t, NetBuilder::Ref ref) {
        return b.add(t, relu(), {{ref, rat(1)}}, rat(0));
    };
    // Layer 3 holds the or-gadget outputs; the accumulation chain consumes
    // one of them per subsequent layer while everything else rides along on
    // single-input ReLU passes (all carried values are non-negative once the
    // z-outputs pin the inputs to {0,1}).
    NetBuilder::Ref y{0, 0};
    for (std::size_t t = 3; t <= last; ++t) {
        if (t == last)
            for (std::size_t i = 0; i < n; ++i) {
                zp[i] = pass(t, zp[i]);
                zn[i] = pass(t, zn[i]);
            }
        if (t == 3) {
            for (std::size_t j = 0; j < m; ++j)
                o[j] = b.add(3, relu(), {{second_stage[j], rat(-1)}}, rat(1));
            y = o[0];
        } else {
            const std::size_t consume = t - 3;
            y = b.add(t, relu(), {{y, rat(1)}, {o[consume], rat(1)}}, rat(0));
            for (std::size_t j = consume + 1; j < m; ++j) o[j] = pass(t, o[j]);
        }
        if (t != last)
            for (std::size_t i = 0; i < n; ++i) {
                zp[i] = pass(t, zp[i]);
                zn[i] = pass(t, zn[i]);
            }
    }

    NameMap names;
    Specification out_spec(VarSpace::Output);
    for (std::size_t i = 0; i < n; ++i) {
        names.output_names["zp" + std::to_string(i)] = zp[i].index;
        names.output_names["zn" + std::to_string(i)] = zn[i].index;
        LinearTerm tp, tn;
        tp.add(static_cast<int>(zp[i].index), rat(1));
        tn.add(static_cast<int>(zn[i].index), rat(1));
        out_spec.add_eq(tp, rat(0));
        out_spec.add_eq(tn, rat(0));
    }
    names.output_names["y"] = y.index;
    LinearTerm ty;
    ty.add(static_cast<int>(y.index), rat(1));
    out_spec.add_eq(ty, Rational(static_cast<long>(m)));

    return {ReachInstance(b.build(), Specification::top(VarSpace::Input), std::move(out_spec)),
            std::move(names), "fanin2", std::nullopt, std::nullopt};
}

namespace {

struct WeightsNet {
    NetBuilder builder;
    std::vector<NetBuilder::Ref> z_tail;  // per variable, at layer 6
    std::vector<NetBuilder::Ref> e_tail;  // per variable, at layer 6
    std::vector<NetBuilder::Ref> or_out;  // per clause, at layer 6
};

// Shared core of the restricted-weight reductions: everything up to layer 6;
// the caller assembles the output layer.
WeightsNet build_weights_layers(const CnfFormula& formula, const Rational& c, const Rational& d,
                                bool with_equality_gadgets) {
    const std::size_t n = formula.num_vars;
    const std::size_t m = formula.num_clauses();
    const bool use_geq_one = c >= 1;

    WeightsNet net{NetBuilder(2 * n), {}, {}, {}};
    NetBuilder& b = net.builder;
    auto x = [&](std::size_t i) { return b.input(i); };
    auto xbar = [&](std::size_t i) { return b.input(n + i); };

    for (std::size_t i = 0; i < n; ++i) {
        // discrete gadget, then an identity chain down to the output layer
        auto neg = b.add(1, relu(), {{x(i), -c}}, rat(0));
        auto pos = b.add(1, relu(), {{x(i), d}}, rat(0));
        auto disc = b.add(2, id(), {{neg, -c}, {pos, -c}}, d);
        auto tail = disc;
        for (std::size_t t = 3; t <= 6; ++t) tail = b.add(t, id(), {{tail, -c}}, rat(0));
        net.z_tail.push_back(tail);

        if (with_equality_gadgets) {
            auto ie = b.add(1, id(), {{x(i), -c}, {xbar(i), -c}}, rat(0));
            auto etail = ie;
            for (std::size_t t = 2; t <= 6; ++t) etail = b.add(t, id(), {{etail, -c}}, rat(0));
            net.e_tail.push_back(etail);
        }
    }

    for (std::size_t j = 0; j < m; ++j) {
        // One norm/normnot gadget per literal slot keeps every weight in the
        // {-c, 0, d} alphabet even when a clause repeats a literal.
        std::vector<std::pair<NetBuilder::Ref, Rational>> relu_edges;
        for (const Literal& lit : formula.clauses[j]) {
            NetBuilder::Ref f{0, 0};
            if (lit.positive) {
                auto a = b.add(1, relu(), {{x(lit.var), -c}}, rat(0));
                auto u = b.add(2, id(), {{a, -c}}, d);
                f = b.add(3, id(), {{u, -c}}, rat(0));
            } else {
                auto p = b.add(1, id(), {{xbar(lit.var), -c}}, rat(0));
                auto r = b.add(2, relu(), {{p, -c}}, rat(0));
                f = b.add(3, id(), {{r, -c}}, rat(0));
            }
            auto staged = b.add(4, id(), {{f, -c}}, rat(0));
            relu_edges.push_back({staged, -c});
        }
        // Inner constant chain: d*c^2 when c >= 1, d*c^4 otherwise.
        auto inner = b.add(use_geq_one ? 3 : 1, id(), {}, d);
        for (std::size_t t = (use_geq_one ? 4 : 2); t <= 4; ++t)
            inner = b.add(t, id(), {{inner, -c}}, rat(0));
        relu_edges.push_back({inner, -c});
        auto r = b.add(5, relu(), relu_edges, rat(0));
        auto outer = b.add(2, id(), {}, d);
        for (std::size_t t = 3; t <= 5; ++t) outer = b.add(t, id(), {{outer, -c}}, rat(0));
        net.or_out.push_back(b.add(6, id(), {{outer, -c}, {r, -c}}, rat(0)));
    }
    return net;
}

GeneratedInstance build_restricted_weights(const CnfFormula& formula, const Rational& c,
                                           const Rational& d, bool with_equality_gadgets,
                                           std::string tag) {
    formula.validate();
    if (c <= 0 || d <= 0) throw std::invalid_argument("weight parameters must be positive");
    const std::size_t n = formula.num_vars;
    const std::size_t m = formula.num_clauses();

    WeightsNet net = build_weights_layers(formula, c, d, with_equality_gadgets);
    NetBuilder& b = net.builder;

    NameMap names;
    Specification out_spec(VarSpace::Output);
    std::size_t out = 0;
    for (std::size_t i = 0; i < n; ++i, ++out) {
        b.add(7, id(), {{net.z_tail[i], -c}}, rat(0));
        names.output_names["z" + std::to_string(i)] = out;
        LinearTerm t;
        t.add(static_cast<int>(out), rat(1));
        out_spec.add_eq(t, rat(0));
    }
    if (with_equality_gadgets)
        for (std::size_t i = 0; i < n; ++i, ++out) {
            b.add(7, id(), {{net.e_tail[i], -c}}, rat(0));
            names.output_names["e" + std::to_string(i)] = out;
            LinearTerm t;
            t.add(static_cast<int>(out), rat(1));
            out_spec.add_eq(t, rat(0));
        }
    std::vector<std::pair<NetBuilder::Ref, Rational>> and_edges;
    for (const auto& ref : net.or_out) and_edges.push_back({ref, d});
    b.add(7, id(), and_edges, rat(0));
    names.output_names["y"] = out;
    LinearTerm y;
    y.add(static_cast<int>(out), rat(1));
    out_spec.add_eq(y, Rational(static_cast<long>(m)) * d * d * c * c * c * c);

    GeneratedInstance generated{
        ReachInstance(b.build(), Specification::top(VarSpace::Input), std::move(out_spec)),
        std::move(names), std::move(tag), c, d};
    return generated;
}

}  // namespace

GeneratedInstance reduce_restricted_weights(const CnfFormula& formula, const Rational& c,
                                            const Rational& d) {
    return build_restricted_weights(formula, c, d, true, "weights");
}

namespace nozero_detail {

// Pinned value of the j-th zero-bias helper input: -sum_{t<j} 1/(2^{t+1} c^t).
Rational bias_input_value(std::size_t j, const Rational& c) {
    Rational sum = 0;
    Rational pow = 1;  // c^t
    Rational two = 1;  // 2^{t+1}
    for (std::size_t t = 0; t < j; ++t) {
        two *= 2;
        sum += 1 / (two * pow);
        pow *= c;
    }
    return -sum;
}

// Pinned value of the helper input whose chain delivers (2^l - 1)/2 at layer
// l-1, compensating nodes that keep their original nonzero bias.
Rational pos_bias_input_value(std::size_t layer, const Rational& c) {
    Rational target = (Rational(mpz_class(1) << layer) - 1) / 2;
    for (std::size_t k = 0; k + 1 < layer; ++k) target = (target - c) / (2 * c);
    return target;
}

std::vector<std::size_t> pos_bias_layers(const Network& base, const Rational& c) {
    std::vector<std::size_t> layers;
    for (std::size_t l = 1; l < base.layers().size(); ++l)  // layer 1 taps xb_1 directly
        for (const Node& node : base.layers()[l])
            if (node.bias == c) {
                layers.push_back(l + 1);  // stored index l -> network layer l+1
                break;
            }
    return layers;
}

}  // namespace nozero_detail

GeneratedInstance reduce_no_zero(const CnfFormula& formula, const Rational& c) {
    formula.validate();
    if (c <= 0) throw std::invalid_argument("weight parameter must be positive");
    const std::size_t n = formula.num_vars;
    const std::size_t m = formula.num_clauses();
    const std::size_t kLayers = 7;

    GeneratedInstance base = build_restricted_weights(formula, c, c, false, "nozero-base");
    const Network& orig = base.instance.network;
    if (orig.layers().size() != kLayers)
        throw std::logic_error("restricted-weight base must have 7 stored layers");
    for (const auto& layer : orig.layers())
        for (const Node& node : layer)
            if (node.bias != 0 && node.bias != c)
                throw std::logic_error("restricted-weight base bias outside {0, c}");

    const std::vector<std::size_t> pos_layers = nozero_detail::pos_bias_layers(orig, c);

    // Input layout: x_0..x_{n-1}, xbar_0..xbar_{n-1}, then helper pairs: one
    // per stored layer for zero-bias cancellation, one per pos_layers entry
    // for nonzero-bias scaling.
    const std::size_t xb_base = 2 * n;
    const std::size_t pb_base = xb_base + 2 * kLayers;
    const std::size_t input_dim = pb_base + 2 * pos_layers.size();
    auto xb = [&](std::size_t j) { return xb_base + 2 * (j - 1); };        // j in 1..7
    auto pb = [&](std::size_t idx) { return pb_base + 2 * idx; };          // idx into pos_layers

    NetBuilder b(input_dim);
    // Per stored layer: refs of the mapped original nodes, their copies, and
    // the helper-chain nodes (each helper node also has a copy).
    struct LayerRefs {
        std::vector<NetBuilder::Ref> orig, copy;
        std::map<std::size_t, std::pair<NetBuilder::Ref, NetBuilder::Ref>> xb_chain;  // by j
        std::map<std::size_t, std::pair<NetBuilder::Ref, NetBuilder::Ref>> pb_chain;  // by idx
    };
    LayerRefs prev;

    for (std::size_t l = 0; l < kLayers; ++l) {
        const std::size_t layer = l + 1;
        const bool is_output = layer == kLayers;
        LayerRefs cur;

        auto edges_for = [&](const Node& node) {
            std::vector<std::pair<NetBuilder::Ref, Rational>> edges;
            if (layer == 1) {
                for (std::size_t i = 0; i < n; ++i) {
                    const Rational wx = node.weights[i];
                    const Rational wxb = node.weights[n + i];
                    if (wx != 0 && wxb != 0)
                        throw std::logic_error("layer-1 node reads both halves of an input pair");
                    if (wx != 0) {
                        edges.push_back({b.input(i), wx});
                        edges.push_back({b.input(n + i), -wx});
                    } else if (wxb != 0) {
                        edges.push_back({b.input(n + i), wxb});
                        edges.push_back({b.input(i), -wxb});
                    } else {
                        edges.push_back({b.input(i), c});
                        edges.push_back({b.input(n + i), c});
                    }
                }
                for (std::size_t j = 1; j <= kLayers; ++j) {
                    Rational w = c, wbar = c;  // cancelling fill: xbar = -x
                    if (j == 1 && node.bias == 0) wbar = -c;       // adds 2c*(-1/2) = -c
                    if (j == 1 && node.bias == c) { w = -c; wbar = c; }  // adds +c
                    edges.push_back({b.input(xb(j)), w});
                    edges.push_back({b.input(xb(j) + 1), wbar});
                }
                for (std::size_t idx = 0; idx < pos_layers.size(); ++idx) {
                    edges.push_back({b.input(pb(idx)), c});
                    edges.push_back({b.input(pb(idx) + 1), c});
                }
            } else {
                for (std::size_t i = 0; i < node.weights.size(); ++i) {
                    const Rational w = node.weights[i];
                    if (w != 0) {
                        edges.push_back({prev.orig[i], w});
                        edges.push_back({prev.copy[i], w});  // doubles the value
                    } else {
                        edges.push_back({prev.orig[i], c});
                        edges.push_back({prev.copy[i], -c});  // copies agree: cancels
                    }
                }
                for (const auto& [j, pair] : prev.xb_chain) {
                    Rational w = c, wcopy = -c;
                    if (node.bias == 0 && j == layer) { wcopy = c; }  // 2c*(-1/2) = -c
                    edges.push_back({pair.first, w});
                    edges.push_back({pair.second, wcopy});
                }
                for (const auto& [idx, pair] : prev.pb_chain) {
                    Rational w = c, wcopy = -c;
                    if (node.bias == c && pos_layers[idx] == layer) { wcopy = c; }
                    edges.push_back({pair.first, w});
                    edges.push_back({pair.second, wcopy});
                }
            }
            return edges;
        };

        for (const Node& node : orig.layers()[l]) {
            if (node.bias == c && layer >= 2 &&
                std::find(pos_layers.begin(), pos_layers.end(), layer) == pos_layers.end())
                throw std::logic_error("missing scaling chain for a nonzero-bias layer");
            auto edges = edges_for(node);
            cur.orig.push_back(b.add(layer, node.activation, edges, c));
            if (!is_output) cur.copy.push_back(b.add(layer, node.activation, edges, c));
        }

        // Helper chains: the xb_j chain has nodes in layers 1..j-1, the
        // pos-bias chain for target layer L has nodes in layers 1..L-1.
        // Every chain node doubles its predecessor like everything else:
        // value_k = 2c * value_{k-1} + c.
        enum class ChainKind { ZeroBias, PosBias };
        auto chain_edges = [&](ChainKind kind, std::size_t key) {
            std::vector<std::pair<NetBuilder::Ref, Rational>> edges;
            if (layer == 1) {
                const std::size_t own = kind == ChainKind::ZeroBias ? xb(key) : pb(key);
                for (std::size_t i = 0; i < n; ++i) {
                    edges.push_back({b.input(i), c});
                    edges.push_back({b.input(n + i), c});
                }
                for (std::size_t j = 1; j <= kLayers; ++j) {
                    edges.push_back({b.input(xb(j)), c});
                    edges.push_back({b.input(xb(j) + 1), xb(j) == own ? -c : c});
                }
                for (std::size_t idx = 0; idx < pos_layers.size(); ++idx) {
                    edges.push_back({b.input(pb(idx)), c});
                    edges.push_back({b.input(pb(idx) + 1), pb(idx) == own ? -c : c});
                }
            } else {
                for (std::size_t i = 0; i < prev.orig.size(); ++i) {
                    edges.push_back({prev.orig[i], c});
                    edges.push_back({prev.copy[i], -c});
                }
                for (const auto& [j, pair] : prev.xb_chain) {
                    const bool mine = kind == ChainKind::ZeroBias && j == key;
                    edges.push_back({pair.first, c});
                    edges.push_back({pair.second, mine ? c : -c});
                }
                for (const auto& [idx, pair] : prev.pb_chain) {
                    const bool mine = kind == ChainKind::PosBias && idx == key;
                    edges.push_back({pair.first, c});
                    edges.push_back({pair.second, mine ? c : -c});
                }
            }
            return edges;
        };

        if (!is_output) {
            for (std::size_t j = layer + 1; j <= kLayers; ++j) {
                auto edges = chain_edges(ChainKind::ZeroBias, j);
                auto node = b.add(layer, id(), edges, c);
                auto copy = b.add(layer, id(), edges, c);
                cur.xb_chain.emplace(j, std::make_pair(node, copy));
            }
            for (std::size_t idx = 0; idx < pos_layers.size(); ++idx) {
                if (pos_layers[idx] <= layer) continue;
                auto edges = chain_edges(ChainKind::PosBias, idx);
                auto node = b.add(layer, id(), edges, c);
                auto copy = b.add(layer, id(), edges, c);
                cur.pb_chain.emplace(idx, std::make_pair(node, copy));
            }
        }
        prev = std::move(cur);
    }

    // Input specification: variable pairing, pinned helper inputs, and the
    // helper pairing; not simple, by design.
    Specification in_spec(VarSpace::Input);
    auto add_pair = [&](std::size_t a, std::size_t bvar) {
        LinearTerm t;
        t.add(static_cast<int>(a), rat(1));
        t.add(static_cast<int>(bvar), rat(1));
        in_spec.add_eq(t, rat(0));
    };
    auto add_pin = [&](std::size_t var, const Rational& value) {
        LinearTerm t;
        t.add(static_cast<int>(var), rat(1));
        in_spec.add_eq(t, value);
    };
    for (std::size_t i = 0; i < n; ++i) add_pair(i, n + i);
    for (std::size_t j = 1; j <= kLayers; ++j) {
        add_pin(xb(j), nozero_detail::bias_input_value(j, c));
        add_pair(xb(j), xb(j) + 1);
    }
    for (std::size_t idx = 0; idx < pos_layers.size(); ++idx) {
        add_pin(pb(idx), nozero_detail::pos_bias_input_value(pos_layers[idx], c));
        add_pair(pb(idx), pb(idx) + 1);
    }

    NameMap names;
    Specification out_spec(VarSpace::Output);
    for (std::size_t i = 0; i < n; ++i) {
        names.output_names["z" + std::to_string(i)] = i;
        LinearTerm t;
        t.add(static_cast<int>(i), rat(1));
        out_spec.add_eq(t, rat(0));
    }
    names.output_names["y"] = n;
    LinearTerm y;
    y.add(static_cast<int>(n), rat(1));
    Rational target = Rational(128) * Rational(static_cast<long>(m));
    for (int k = 0; k < 6; ++k) target *= c;
    out_spec.add_eq(y, target);

    return {ReachInstance(b.build(), std::move(in_spec), std::move(out_spec)), std::move(names),
            "nozero", c, c};
}

Network to_relu_only(const Network& network) {
    struct Mapped {
        std::size_t pos;
        std::optional<std::size_t> neg;
    };
    std::vector<Mapped> prev_map;
    for (std::size_t i = 0; i < network.input_dim(); ++i) prev_map.push_back({i, std::nullopt});
    std::size_t prev_width = network.input_dim();

    std::vector<std::vector<Node>> layers;
    for (std::size_t l = 0; l < network.layers().size(); ++l) {
        const bool is_output = l + 1 == network.layers().size();
        std::vector<Node> nodes;
        std::vector<Mapped> cur_map;
        std::size_t next = 0;
        for (const Node& node : network.layers()[l]) {
            if (!node.activation.is_relu() && !node.activation.is_identity())
                throw std::invalid_argument(
                    "identity elimination requires ReLU/identity activations only");
            RatVec weights(prev_width, Rational(0));
            for (std::size_t j = 0; j < node.weights.size(); ++j) {
                if (node.weights[j] == 0) continue;
                weights[prev_map[j].pos] += node.weights[j];
                if (prev_map[j].neg) weights[*prev_map[j].neg] -= node.weights[j];
            }
            if (!is_output && node.activation.is_identity()) {
                RatVec negated;
                negated.reserve(weights.size());
                for (const auto& w : weights) negated.push_back(-w);
                nodes.push_back({std::move(weights), node.bias, PWLFunction::relu()});
                nodes.push_back({std::move(negated), -node.bias, PWLFunction::relu()});
                cur_map.push_back({next, next + 1});
                next += 2;
            } else {
                nodes.push_back({std::move(weights), node.bias, node.activation});
                cur_map.push_back({next, std::nullopt});
                next += 1;
            }
        }
        prev_width = nodes.size();
        prev_map = std::move(cur_map);
        layers.push_back(std::move(nodes));
    }
    return Network(network.input_dim(), std::move(layers));
}

RatVec GeneratedInstance::encode_assignment(const std::vector<bool>& assignment) const {
    const std::size_t n = assignment.size();
    if (reduction_tag == "weights" || reduction_tag == "nozero") {
        if (!c || !d) throw std::logic_error("restricted-weight instance without parameters");
        RatVec input(instance.network.input_dim(), Rational(0));
        if (2 * n > input.size()) throw std::invalid_argument("assignment size mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            input[i] = assignment[i] ? Rational(1 / *c) : Rational(-(*d) / (*c * *c));
            input[n + i] = -input[i];
        }
        if (reduction_tag == "nozero") {
            const std::size_t kLayers = 7;
            const std::size_t xb_base = 2 * n;
            const std::size_t pb_base = xb_base + 2 * kLayers;
            for (std::size_t j = 1; j <= kLayers; ++j) {
                input[xb_base + 2 * (j - 1)] = nozero_detail::bias_input_value(j, *c);
                input[xb_base + 2 * (j - 1) + 1] = -input[xb_base + 2 * (j - 1)];
            }
            const std::size_t pos_count = (input.size() - pb_base) / 2;
            // pos-bias targets are layer 2, then layer 3 when present
            for (std::size_t idx = 0; idx < pos_count; ++idx) {
                input[pb_base + 2 * idx] =
                    nozero_detail::pos_bias_input_value(idx == 0 ? 2 : 3, *c);
                input[pb_base + 2 * idx + 1] = -input[pb_base + 2 * idx];
            }
        } else if (2 * n != input.size()) {
            throw std::invalid_argument("assignment size mismatch");
        }
        return input;
    }
    if (instance.network.input_dim() != n) throw std::invalid_argument("assignment size mismatch");
    return boolean_input(assignment);
}

InstanceFiles write_instance(const GeneratedInstance& generated, const std::string& prefix) {
    InstanceFiles files{prefix + ".net.json", prefix + ".in.spec", prefix + ".out.spec",
                        prefix + ".map.json"};
    generated.instance.network.save(files.network_path);
    generated.instance.input_spec.save(files.input_spec_path);
    generated.instance.output_spec.save(files.output_spec_path, &generated.name_map);

    json sidecar = json::parse(generated.name_map.to_json());
    sidecar["reduction"] = generated.reduction_tag;
    if (generated.c) sidecar["c"] = to_string(*generated.c);
    if (generated.d) sidecar["d"] = to_string(*generated.d);
    std::ofstream out(files.name_map_path);
    if (!out) throw std::runtime_error("cannot write name map file: " + files.name_map_path);
    out << sidecar.dump(2) << "\n";
    return files;
}

GeneratedInstance read_instance(const InstanceFiles& files, const std::string& reduction_tag) {
    std::ifstream map_in(files.name_map_path);
    if (!map_in) throw std::runtime_error("cannot open name map file: " + files.name_map_path);
    std::ostringstream buf;
    buf << map_in.rdbuf();
    json sidecar = json::parse(buf.str());
    NameMap names = NameMap::from_json(buf.str());

    Network network = Network::load(files.network_path);
    Specification in_spec = Specification::load(files.input_spec_path, VarSpace::Input);
    Specification out_spec = Specification::load(files.output_spec_path, VarSpace::Output, &names);

    GeneratedInstance generated{
        ReachInstance(std::move(network), std::move(in_spec), std::move(out_spec)),
        std::move(names),
        reduction_tag.empty() ? sidecar.value("reduction", std::string()) : reduction_tag,
        std::nullopt,
        std::nullopt};
    if (sidecar.contains("c")) generated.c = parse_rational(sidecar["c"].get<std::string>());
    if (sidecar.contains("d")) generated.d = parse_rational(sidecar["d"].get<std::string>());
    return generated;
}

}  // namespace reachkit
