#include "reachkit/lp.hpp"

#include <sstream>
#include <stdexcept>

#include "reachkit/lp_format.hpp"

namespace reachkit {

std::size_t LinearProgram::add_var(const std::string& name) {
    var_names.resize(var_count);
    var_names.push_back(name.empty() ? "v" + std::to_string(var_count) : name);
    return var_count++;
}

void LinearProgram::add(LinearTerm term, Rel rel, Rational bound) {
    constraints.push_back({std::move(term), rel, std::move(bound)});
}

std::string LinearProgram::name_of(std::size_t var) const {
    if (var < var_names.size() && !var_names[var].empty()) return var_names[var];
    return "v" + std::to_string(var);
}

void LinearProgram::validate() const {
    auto check_term = [&](const LinearTerm& term) {
        if (term.max_var() >= static_cast<int>(var_count))
            throw std::invalid_argument("linear program references undeclared variable " +
                                        std::to_string(term.max_var()));
    };
    for (const auto& c : constraints) check_term(c.term);
    if (objective) check_term(objective->second);
}

std::string LinearProgram::to_lp_text() const {
    LpTextWriter writer;
    writer.objective_minimize = !objective || objective->first == Direction::Minimize;
    if (objective) writer.objective = objective->second;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const auto& c = constraints[i];
        writer.add_row("c" + std::to_string(i), c.term, c.rel, c.bound);
    }
    for (std::size_t v = 0; v < var_count; ++v) writer.free_vars.push_back(name_of(v));
    auto name = [this](int v) { return name_of(static_cast<std::size_t>(v)); };
    return writer.render(name);
}

namespace {

// Full-tableau two-phase simplex over Q(delta). Structural variables are the
// split x = p - q of each free LP variable, followed by slacks and
// artificials. Bland's rule keeps it finite.
class Simplex {
public:
    explicit Simplex(const LinearProgram& lp) : lp_(lp) {
        lp_.validate();
        build();
    }

    LPResult run() {
        if (!phase1()) return {LPResult::Status::Infeasible, {}, {}};
        if (!lp_.objective) return extract(LPResult::Status::Feasible);
        if (!phase2()) return {LPResult::Status::Unbounded, {}, {}};
        return extract(LPResult::Status::Optimal);
    }

private:
    const LinearProgram& lp_;
    std::size_t n_vars_ = 0;      // structural columns (2 per LP variable)
    std::size_t n_cols_ = 0;      // structural + slack + artificial
    std::size_t first_art_ = 0;   // first artificial column
    std::vector<std::vector<Rational>> rows_;
    std::vector<DeltaRational> rhs_;
    std::vector<std::size_t> basis_;

    std::size_t pos_col(std::size_t var) const { return 2 * var; }
    std::size_t neg_col(std::size_t var) const { return 2 * var + 1; }

    void build() {
        n_vars_ = 2 * lp_.var_count;
        std::size_t n_slacks = 0;
        for (const auto& c : lp_.constraints)
            if (c.rel != Rel::Eq) ++n_slacks;
        first_art_ = n_vars_ + n_slacks;
        n_cols_ = first_art_;  // artificial columns appended on demand

        std::size_t slack = 0;
        for (const auto& c : lp_.constraints) {
            std::vector<Rational> row(first_art_, Rational(0));
            for (const auto& [var, coeff] : c.term.coeffs()) {
                row[pos_col(var)] = coeff;
                row[neg_col(var)] = -coeff;
            }
            DeltaRational rhs(c.bound);
            if (c.rel == Rel::Lt) rhs.delta_coeff -= 1;
            if (c.rel != Rel::Eq) row[n_vars_ + slack] = 1;

            bool negated = rhs < DeltaRational();
            if (negated) {
                for (auto& x : row) x = -x;
                rhs = -rhs;
            }
            if (c.rel != Rel::Eq && !negated) {
                basis_.push_back(n_vars_ + slack);  // slack is basic as-is
            } else {
                basis_.push_back(SIZE_MAX);  // artificial assigned below
            }
            if (c.rel != Rel::Eq) ++slack;
            rows_.push_back(std::move(row));
            rhs_.push_back(std::move(rhs));
        }
        // One artificial per row that has no basic slack.
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (basis_[i] != SIZE_MAX) continue;
            for (auto& row : rows_) row.push_back(Rational(0));
            rows_[i][n_cols_] = 1;
            basis_[i] = n_cols_;
            ++n_cols_;
        }
    }

    // Reduced-cost row for cost vector c over the current basis:
    // z_j = c_j - c_B * B^-1 A_j, computed directly from the tableau.
    std::vector<Rational> reduced_costs(const std::vector<Rational>& costs) const {
        std::vector<Rational> z(costs);
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const Rational& cb = costs[basis_[i]];
            if (cb == 0) continue;
            for (std::size_t j = 0; j < n_cols_; ++j)
                if (rows_[i][j] != 0) z[j] -= cb * rows_[i][j];
        }
        return z;
    }

    void pivot(std::size_t row, std::size_t col) {
        const Rational p = rows_[row][col];
        for (auto& x : rows_[row]) x /= p;
        rhs_[row] = rhs_[row] / p;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (i == row) continue;
            const Rational f = rows_[i][col];
            if (f == 0) continue;
            for (std::size_t j = 0; j < n_cols_; ++j)
                if (rows_[row][j] != 0) rows_[i][j] -= f * rows_[row][j];
            rhs_[i] -= f * rhs_[row];
        }
        basis_[row] = col;
    }

    // Minimizes costs*x with Bland's rule; returns false on unbounded.
    bool iterate(const std::vector<Rational>& costs, bool forbid_artificials) {
        while (true) {
            std::vector<Rational> z = reduced_costs(costs);
            std::size_t enter = SIZE_MAX;
            std::size_t limit = forbid_artificials ? first_art_ : n_cols_;
            for (std::size_t j = 0; j < limit; ++j) {
                if (z[j] < 0) {
                    enter = j;
                    break;
                }
            }
            if (enter == SIZE_MAX) return true;  // optimal
            std::size_t leave = SIZE_MAX;
            DeltaRational best;
            for (std::size_t i = 0; i < rows_.size(); ++i) {
                if (rows_[i][enter] <= 0) continue;
                DeltaRational ratio = rhs_[i] / rows_[i][enter];
                if (leave == SIZE_MAX || ratio < best ||
                    (ratio == best && basis_[i] < basis_[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave == SIZE_MAX) return false;  // unbounded
            pivot(leave, enter);
        }
    }

    bool phase1() {
        if (n_cols_ == first_art_) return true;  // no artificials needed
        std::vector<Rational> costs(n_cols_, Rational(0));
        for (std::size_t j = first_art_; j < n_cols_; ++j) costs[j] = 1;
        if (!iterate(costs, false))
            throw std::logic_error("phase-1 objective cannot be unbounded");
        DeltaRational infeasibility;
        for (std::size_t i = 0; i < rows_.size(); ++i)
            if (basis_[i] >= first_art_) infeasibility += rhs_[i];
        if (infeasibility > DeltaRational()) return false;
        drive_out_artificials();
        return true;
    }

    void drive_out_artificials() {
        for (std::size_t i = 0; i < rows_.size();) {
            if (basis_[i] < first_art_) {
                ++i;
                continue;
            }
            std::size_t col = SIZE_MAX;
            for (std::size_t j = 0; j < first_art_; ++j)
                if (rows_[i][j] != 0) {
                    col = j;
                    break;
                }
            if (col == SIZE_MAX) {
                // Redundant row; drop it.
                rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
                rhs_.erase(rhs_.begin() + static_cast<std::ptrdiff_t>(i));
                basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
                continue;
            }
            pivot(i, col);
            ++i;
        }
    }

    bool phase2() {
        std::vector<Rational> costs(n_cols_, Rational(0));
        const auto& [dir, term] = *lp_.objective;
        const Rational sign = dir == Direction::Minimize ? 1 : -1;
        for (const auto& [var, coeff] : term.coeffs()) {
            costs[pos_col(var)] = sign * coeff;
            costs[neg_col(var)] = -sign * coeff;
        }
        return iterate(costs, true);
    }

    LPResult extract(LPResult::Status status) const {
        std::vector<DeltaRational> cols(n_cols_);
        for (std::size_t i = 0; i < rows_.size(); ++i) cols[basis_[i]] = rhs_[i];
        std::vector<DeltaRational> symbolic(lp_.var_count);
        for (std::size_t v = 0; v < lp_.var_count; ++v)
            symbolic[v] = cols[pos_col(v)] - cols[neg_col(v)];

        // Pick a concrete delta small enough that every constraint that holds
        // in Q(delta) still holds with it substituted.
        Rational delta(1);
        bool any_delta = false;
        for (const auto& s : symbolic)
            if (s.delta_coeff != 0) any_delta = true;
        for (const auto& c : lp_.constraints) {
            DeltaRational lhs;
            for (const auto& [var, coeff] : c.term.coeffs()) lhs += coeff * symbolic[var];
            DeltaRational gap = lhs - DeltaRational(c.bound);  // must be <= 0 (or < 0, or == 0)
            if (gap.delta_coeff != 0) any_delta = true;
            if (gap.value < 0 && gap.delta_coeff > 0) {
                Rational cap = -gap.value / gap.delta_coeff;
                if (cap < delta) delta = cap;
            }
        }
        if (any_delta) delta /= 2;

        LPResult result;
        result.status = status;
        result.assignment.reserve(lp_.var_count);
        for (const auto& s : symbolic)
            result.assignment.push_back(s.value + s.delta_coeff * delta);

        for (const auto& c : lp_.constraints) {
            Rational lhs = c.term.eval(result.assignment);
            bool ok = c.rel == Rel::Eq ? lhs == c.bound
                      : c.rel == Rel::Le ? lhs <= c.bound
                                         : lhs < c.bound;
            if (!ok) throw std::logic_error("simplex produced an assignment failing re-check");
        }
        if (status == LPResult::Status::Optimal)
            result.value = lp_.objective->second.eval(result.assignment);
        return result;
    }
};

}  // namespace

LPResult solve(const LinearProgram& lp) { return Simplex(lp).run(); }

LPResult minimize_slacks(const LinearProgram& lp, const std::vector<std::size_t>& slacks) {
    LinearProgram strict = lp;
    strict.objective.reset();
    for (std::size_t var : slacks) {
        if (var >= lp.var_count)
            throw std::invalid_argument("slack variable not declared in program");
        LinearTerm t;
        t.add(static_cast<int>(var), rat(1));
        strict.add(std::move(t), Rel::Lt, rat(0));
    }
    return solve(strict);
}

}  // namespace reachkit
