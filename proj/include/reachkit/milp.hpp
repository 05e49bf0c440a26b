#pragma once

#include <string>
#include <vector>

#include "reachkit/verifier.hpp"

namespace reachkit {

struct Interval {
    Rational lo, hi;
};

// Per-node pre/post-activation intervals from plain interval arithmetic over
// the input box extracted from the input specification.
struct IntervalBounds {
    std::vector<Interval> inputs;
    std::vector<std::vector<Interval>> pre_activation;
    std::vector<std::vector<Interval>> post_activation;
};

class UnboundedInputError : public std::runtime_error {
public:
    UnboundedInputError(std::size_t dim, const std::string& side)
        : std::runtime_error("input dimension " + std::to_string(dim) + " has no " + side +
                             " bound in the input specification"),
          dimension(dim) {}
    std::size_t dimension;
};

IntervalBounds compute_bounds(const Network& network, const Specification& input_spec);

// Big-M mixed-integer encoding of a reachability instance. ReLU nodes get the
// y/s split with one binary each; identity nodes a plain equality; other PWL
// nodes one indicator per piece with an exactly-one row.
struct MILP {
    enum class VarKind { Continuous, Binary };
    struct Var {
        std::string name;
        VarKind kind;
    };
    enum class Role {
        InputSpec,
        OutputSpec,
        NodeEquality,    // identity nodes
        ReluSplit,       // arg = y - s
        ReluNonNegY,     // y >= 0
        ReluNonNegS,     // s >= 0
        ReluUpperY,      // y <= M+ (1 - z)
        ReluUpperS,      // s <= M- z
        PieceExactlyOne,
        PieceLower,
        PieceUpper,
        PieceValueLower,
        PieceValueUpper,
    };
    struct Constraint {
        LinearTerm term;
        Rel rel;
        Rational bound;
        Role role;
        int layer = -1;  // node coordinates where applicable
        int node = -1;
    };
    struct IndicatorGroup {
        std::vector<std::size_t> vars;  // exactly one of these is 1
    };

    std::vector<Var> vars;
    std::vector<Constraint> constraints;
    // One group per branching node: a ReLU group holds the single binary
    // (choices z=0 / z=1), a piece group holds one indicator per piece.
    std::vector<IndicatorGroup> groups;
    std::vector<std::size_t> input_vars;
    std::vector<std::vector<std::size_t>> node_output_vars;

    std::size_t binary_count() const;
    std::string to_lp_text() const;
};

MILP encode(const ReachInstance& instance);
MILP encode(const ReachInstance& instance, const IntervalBounds& bounds);

void export_lp(const MILP& milp, const std::string& path);

enum class MilpStatus { Feasible, Infeasible };

// Exhaustive enumeration of the binary assignments (group-wise; assignments
// violating an exactly-one row are skipped as trivially infeasible), each
// reduced to an LP. Intended as an internal cross-check on small instances.
MilpStatus check_milp(const MILP& milp, std::size_t combination_cap = std::size_t(1) << 16);

}  // namespace reachkit
