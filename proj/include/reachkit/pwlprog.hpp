#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "reachkit/lp.hpp"
#include "reachkit/network.hpp"
#include "reachkit/spec.hpp"

namespace reachkit {

// f(constant + term) = result_var over the program's variables.
struct PWLEquality {
    PWLFunction f;
    LinearTerm term;
    Rational constant;
    std::size_t result_var;
};

// Linear constraints plus one PWL-equality per network node. Variables are
// the network inputs followed by one variable per node, layer by layer.
struct PWLProgram {
    std::size_t var_count = 0;
    std::vector<std::string> var_names;
    std::vector<LinearProgram::Constraint> linear;
    std::vector<PWLEquality> equalities;

    std::vector<std::size_t> input_vars;
    std::vector<std::vector<std::size_t>> node_vars;  // [layer][node]

    std::string name_of(std::size_t var) const;
    std::string to_lp_text() const;
};

// One chosen linear piece per PWL-equality.
struct PhaseVector {
    std::vector<std::size_t> choices;

    bool operator==(const PhaseVector&) const = default;
    // Mixed-radix encoding (radix = piece count per equality), for logging.
    std::string encode(const PWLProgram& program) const;
};

// How phase-fixing renders the upper breakpoint bound of a chosen piece.
// Closed is sound and complete only for continuous activations, where both
// pieces agree at the breakpoint; Strict is the general construction with a
// fresh slack variable per bound that must end up strictly negative.
enum class PhaseMode { Closed, Strict };

PhaseMode default_phase_mode(const PWLProgram& program);

PWLProgram build_program(const Network& network, const Specification& input_spec,
                         const Specification& output_spec);

struct FixedProgram {
    LinearProgram lp;
    std::vector<std::size_t> slack_vars;  // strictness slacks (Strict mode only)
};

// Linearizes the program under the given phase choice: per equality, a lower
// breakpoint bound (omitted for the first piece), an upper breakpoint bound
// (omitted for the last piece), and the chosen piece's value equality.
FixedProgram fix_phases(const PWLProgram& program, const PhaseVector& phases, PhaseMode mode);

// Feasibility of the phase-fixed program, honoring strictness; any returned
// assignment is re-checked against every PWL-equality via exact evaluation.
LPResult check_phase(const PWLProgram& program, const PhaseVector& phases);
LPResult check_phase(const PWLProgram& program, const PhaseVector& phases, PhaseMode mode);

}  // namespace reachkit
