#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reachkit/spec.hpp"

namespace reachkit {

// Element of the ordered field Q(delta): value + delta_coeff * delta for an
// infinitesimal delta > 0. Ordering is lexicographic. Only multiplication by
// plain rationals is ever needed.
struct DeltaRational {
    Rational value;
    Rational delta_coeff;

    DeltaRational() : value(0), delta_coeff(0) {}
    DeltaRational(Rational v) : value(std::move(v)), delta_coeff(0) {}
    DeltaRational(Rational v, Rational d) : value(std::move(v)), delta_coeff(std::move(d)) {}

    DeltaRational& operator+=(const DeltaRational& o) {
        value += o.value;
        delta_coeff += o.delta_coeff;
        return *this;
    }
    DeltaRational& operator-=(const DeltaRational& o) {
        value -= o.value;
        delta_coeff -= o.delta_coeff;
        return *this;
    }
    friend DeltaRational operator+(DeltaRational a, const DeltaRational& b) { return a += b; }
    friend DeltaRational operator-(DeltaRational a, const DeltaRational& b) { return a -= b; }
    friend DeltaRational operator*(const Rational& c, const DeltaRational& a) {
        return {c * a.value, c * a.delta_coeff};
    }
    friend DeltaRational operator/(const DeltaRational& a, const Rational& c) {
        return {a.value / c, a.delta_coeff / c};
    }
    DeltaRational operator-() const { return {-value, -delta_coeff}; }

    friend bool operator==(const DeltaRational& a, const DeltaRational& b) {
        return a.value == b.value && a.delta_coeff == b.delta_coeff;
    }
    friend bool operator<(const DeltaRational& a, const DeltaRational& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.delta_coeff < b.delta_coeff;
    }
    friend bool operator<=(const DeltaRational& a, const DeltaRational& b) {
        return a < b || a == b;
    }
    friend bool operator>(const DeltaRational& a, const DeltaRational& b) { return b < a; }
    friend bool operator>=(const DeltaRational& a, const DeltaRational& b) { return b <= a; }
};

enum class Rel { Le, Lt, Eq };

enum class Direction { Minimize, Maximize };

struct LinearProgram {
    struct Constraint {
        LinearTerm term;
        Rel rel = Rel::Le;
        Rational bound;
    };

    std::size_t var_count = 0;
    std::vector<std::string> var_names;  // optional; filled with v<i> on demand
    std::vector<Constraint> constraints;
    std::optional<std::pair<Direction, LinearTerm>> objective;

    std::size_t add_var(const std::string& name = "");
    void add(LinearTerm term, Rel rel, Rational bound);
    std::string name_of(std::size_t var) const;

    // Throws if a constraint or the objective references an undeclared variable.
    void validate() const;

    // Debug dump in the LP text format shared with the MILP exporter.
    std::string to_lp_text() const;
};

struct LPResult {
    enum class Status { Feasible, Infeasible, Unbounded, Optimal };

    Status status = Status::Infeasible;
    RatVec assignment;  // exact witness, present for Feasible/Optimal
    Rational value;     // objective value at the witness, for Optimal

    bool feasible() const { return status == Status::Feasible || status == Status::Optimal; }
};

// Exact simplex with Bland's rule. Strict constraints are turned into
// t <= b - delta over Q(delta); any returned assignment is rational (a
// concrete positive delta is substituted) and re-checked against every
// constraint before being handed out.
LPResult solve(const LinearProgram& lp);

// Feasibility of lp with every listed slack variable forced strictly
// negative. Equivalent to the minimize-and-check-negative reading.
LPResult minimize_slacks(const LinearProgram& lp, const std::vector<std::size_t>& slacks);

}  // namespace reachkit
