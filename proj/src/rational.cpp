#include "reachkit/rational.hpp"

#include <cctype>

namespace reachkit {

Rational parse_rational(const std::string& text) {
    std::string s;
    s.reserve(text.size());
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        bool ok = std::isdigit(static_cast<unsigned char>(c)) || c == '/' ||
                  (c == '-' && (i == 0 || s[i - 1] == '/'));
        if (!ok) throw std::invalid_argument("bad rational literal: '" + text + "'");
    }
    Rational r;
    if (r.set_str(s, 10) != 0)
        throw std::invalid_argument("bad rational literal: '" + text + "'");
    if (r.get_den() == 0)
        throw std::invalid_argument("zero denominator in rational literal: '" + text + "'");
    r.canonicalize();
    return r;
}

std::string to_string(const Rational& value) {
    if (value.get_den() == 1) return value.get_num().get_str();
    return value.get_str();
}

std::size_t rational_bits(const Rational& value) {
    auto bits = [](const mpz_class& z) -> std::size_t {
        if (z == 0) return 1;
        return mpz_sizeinbase(z.get_mpz_t(), 2);
    };
    return bits(value.get_num()) + bits(value.get_den());
}

std::size_t vector_bits(const RatVec& values) {
    std::size_t total = 0;
    for (const auto& v : values) total += rational_bits(v);
    return total;
}

std::string to_string(const RatVec& values, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += sep;
        out += to_string(values[i]);
    }
    return out;
}

}  // namespace reachkit
