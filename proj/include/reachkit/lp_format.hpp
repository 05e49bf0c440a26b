#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reachkit/spec.hpp"

namespace reachkit {

enum class Rel;

// Emits the CPLEX-style LP text format used for program dumps and MILP
// export. Coefficients with terminating decimal expansions are written as
// exact decimals; any other row is scaled by the lcm of its denominators and
// written with integer coefficients (the scaling preserves the constraint
// exactly). Strict rows, which only occur in debug dumps, use '<'.
struct LpTextWriter {
    struct Row {
        std::string name;
        LinearTerm term;
        Rel rel;
        Rational bound;
    };

    bool objective_minimize = true;
    std::optional<LinearTerm> objective;
    std::vector<Row> rows;
    std::vector<std::string> free_vars;
    std::vector<std::string> binary_vars;

    void add_row(std::string name, LinearTerm term, Rel rel, Rational bound);

    std::string render(const std::function<std::string(int)>& var_name) const;
};

// "p/q" rendered as an exact decimal string when q divides a power of ten.
std::optional<std::string> exact_decimal(const Rational& value);

}  // namespace reachkit
