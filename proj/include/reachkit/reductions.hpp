#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "reachkit/verifier.hpp"

namespace reachkit {

struct Literal {
    std::size_t var = 0;
    bool positive = true;

    bool operator==(const Literal&) const = default;
    auto operator<=>(const Literal&) const = default;
};

// Strict 3SAT: exactly three literal slots per clause (repetitions allowed).
struct CnfFormula {
    std::size_t num_vars = 0;
    std::vector<std::array<Literal, 3>> clauses;

    void validate() const;
    std::size_t num_clauses() const { return clauses.size(); }

    // Standard DIMACS; clauses with fewer than three literals are padded by
    // repeating the last literal, clauses with more are rejected.
    static CnfFormula parse_dimacs(const std::string& text);
    static CnfFormula load_dimacs(const std::string& path);
    std::string to_dimacs() const;

    bool satisfied_by(const std::vector<bool>& assignment) const;
};

enum class GadgetKind {
    Not,
    Or3,
    AndN,
    BoolEps,
    BoolRepaired,
    Discrete,
    InverseEq,
    Norm,
    NormNot,
    OrLeOne,
    OrGeqOne,
    OrPrime,
};

struct GadgetParams {
    std::size_t n = 0;              // AndN fan-in
    std::optional<Rational> eps;    // BoolEps
    std::optional<Rational> c, d;   // restricted-weight gadgets
};

// Canonical network computing the gadget's defining function.
Network make_gadget(GadgetKind kind, const GadgetParams& params = {});

struct GeneratedInstance {
    ReachInstance instance;
    NameMap name_map;
    std::string reduction_tag;
    std::optional<Rational> c, d;

    // The reduction's canonical encoding of a boolean assignment as a network
    // input (0/1 for the unit-weight reductions, the 1/c and -d/c^2 pair plus
    // pinned helper inputs for the restricted-weight ones).
    RatVec encode_assignment(const std::vector<bool>& assignment) const;
};

GeneratedInstance reduce_general(const CnfFormula& formula);
GeneratedInstance reduce_single_layer(const CnfFormula& formula);
GeneratedInstance reduce_fanin1(const CnfFormula& formula);
GeneratedInstance reduce_fanin2(const CnfFormula& formula);
GeneratedInstance reduce_restricted_weights(const CnfFormula& formula, const Rational& c,
                                            const Rational& d);
GeneratedInstance reduce_no_zero(const CnfFormula& formula, const Rational& c);

// Replaces every hidden identity node by a positive/negative ReLU pair with
// sign-flipped outgoing weights; the computed function is preserved exactly
// and the depth is unchanged.
Network to_relu_only(const Network& network);

// Serialization bundle written by the generator CLI.
struct InstanceFiles {
    std::string network_path;
    std::string input_spec_path;
    std::string output_spec_path;
    std::string name_map_path;
};

InstanceFiles write_instance(const GeneratedInstance& generated, const std::string& prefix);
GeneratedInstance read_instance(const InstanceFiles& files, const std::string& reduction_tag = "");

}  // namespace reachkit
