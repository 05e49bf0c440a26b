#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "reachkit/rational.hpp"

namespace reachkit {

// Piecewise-linear function f given by linear pieces a_i*x + b_i and strictly
// increasing breakpoints t_0 < ... < t_{k-2}. Piece i applies on
// [t_{i-1}, t_i), i.e. a breakpoint belongs to the piece above it; the first
// piece extends to -inf and the last to +inf.
class PWLFunction {
public:
    using Piece = std::pair<Rational, Rational>;  // (slope, intercept)

    PWLFunction(std::vector<Piece> pieces, RatVec breakpoints);

    static const PWLFunction& relu();
    static const PWLFunction& identity();

    const std::vector<Piece>& pieces() const { return pieces_; }
    const RatVec& breakpoints() const { return breakpoints_; }
    std::size_t piece_count() const { return pieces_.size(); }

    // Index of the piece that applies at x.
    std::size_t piece_index(const Rational& x) const;

    Rational eval(const Rational& x) const;
    Rational eval_piece(std::size_t piece, const Rational& x) const;

    // Adjacent pieces agree in value at every breakpoint.
    bool continuous() const;

    bool is_relu() const;
    bool is_identity() const;

    bool operator==(const PWLFunction& other) const = default;

private:
    std::vector<Piece> pieces_;
    RatVec breakpoints_;
};

}  // namespace reachkit
