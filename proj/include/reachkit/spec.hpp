#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reachkit/rational.hpp"

namespace reachkit {

// Sparse linear term sum_i c_i * x_i with no constant and no stored zeros.
class LinearTerm {
public:
    LinearTerm() = default;

    void add(int var, const Rational& coeff);
    const std::map<int, Rational>& coeffs() const { return coeffs_; }
    bool empty() const { return coeffs_.empty(); }
    std::size_t var_count() const { return coeffs_.size(); }
    int max_var() const;

    Rational eval(const RatVec& values) const;

    LinearTerm negated() const;
    LinearTerm scaled(const Rational& factor) const;

    bool operator==(const LinearTerm&) const = default;

private:
    std::map<int, Rational> coeffs_;
};

enum class VarSpace { Input, Output };

// Maps textual variable names of generated instances (z0, e1, y2, y, ...) to
// output indices. Input variables are always x<i>.
struct NameMap {
    std::map<std::string, std::size_t> output_names;

    std::string name_of(std::size_t index) const;
    std::string to_json() const;
    static NameMap from_json(const std::string& text);
    static NameMap load(const std::string& path);
    void save(const std::string& path) const;
};

// Conjunction of linear inequalities term <= bound over one variable space.
// >=, == and the constants true/false are parsing sugar and are lowered to
// <= conjuncts immediately.
class Specification {
public:
    struct Conjunct {
        LinearTerm term;
        Rational bound;  // term <= bound
        bool operator==(const Conjunct&) const = default;
    };

    explicit Specification(VarSpace space) : space_(space) {}

    VarSpace space() const { return space_; }
    const std::vector<Conjunct>& conjuncts() const { return conjuncts_; }

    void add_le(LinearTerm term, Rational bound);
    void add_ge(const LinearTerm& term, const Rational& bound);
    void add_eq(const LinearTerm& term, const Rational& bound);

    static Specification top(VarSpace space);
    static Specification bottom(VarSpace space);
    // Conjunction lo <= x_var <= hi.
    static Specification box(VarSpace space, const std::vector<std::pair<Rational, Rational>>& bounds);

    bool check(const RatVec& values) const;
    // Every conjunct mentions exactly one variable.
    bool simple() const;
    // Largest mentioned variable id + 1 (0 when vacuous).
    std::size_t dimension() const;

    std::string to_text(const NameMap* names = nullptr) const;
    static Specification parse(const std::string& text, VarSpace space, const NameMap* names = nullptr);
    static Specification load(const std::string& path, VarSpace space, const NameMap* names = nullptr);
    void save(const std::string& path, const NameMap* names = nullptr) const;

    std::size_t size_bits() const;

    bool operator==(const Specification&) const = default;

private:
    VarSpace space_;
    std::vector<Conjunct> conjuncts_;
};

}  // namespace reachkit
