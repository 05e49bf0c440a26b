#include "reachkit/pwl.hpp"

#include <stdexcept>

namespace reachkit {

PWLFunction::PWLFunction(std::vector<Piece> pieces, RatVec breakpoints)
    : pieces_(std::move(pieces)), breakpoints_(std::move(breakpoints)) {
    if (pieces_.empty()) throw std::invalid_argument("PWL function needs at least one piece");
    if (breakpoints_.size() + 1 != pieces_.size())
        throw std::invalid_argument("PWL function needs exactly one breakpoint less than pieces");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i)
        if (!(breakpoints_[i - 1] < breakpoints_[i]))
            throw std::invalid_argument("PWL breakpoints must be strictly increasing");
}

const PWLFunction& PWLFunction::relu() {
    static const PWLFunction f({{rat(0), rat(0)}, {rat(1), rat(0)}}, {rat(0)});
    return f;
}

const PWLFunction& PWLFunction::identity() {
    static const PWLFunction f({{rat(1), rat(0)}}, {});
    return f;
}

std::size_t PWLFunction::piece_index(const Rational& x) const {
    // First breakpoint strictly above x decides the piece.
    std::size_t i = 0;
    while (i < breakpoints_.size() && x >= breakpoints_[i]) ++i;
    return i;
}

Rational PWLFunction::eval(const Rational& x) const { return eval_piece(piece_index(x), x); }

Rational PWLFunction::eval_piece(std::size_t piece, const Rational& x) const {
    if (piece >= pieces_.size()) throw std::out_of_range("PWL piece index out of range");
    return pieces_[piece].first * x + pieces_[piece].second;
}

bool PWLFunction::continuous() const {
    for (std::size_t j = 0; j < breakpoints_.size(); ++j)
        if (eval_piece(j, breakpoints_[j]) != eval_piece(j + 1, breakpoints_[j])) return false;
    return true;
}

bool PWLFunction::is_relu() const { return *this == relu(); }

bool PWLFunction::is_identity() const { return *this == identity(); }

}  // namespace reachkit
