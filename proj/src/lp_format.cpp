#include "reachkit/lp_format.hpp"

#include <sstream>

#include "reachkit/lp.hpp"

namespace reachkit {

void LpTextWriter::add_row(std::string name, LinearTerm term, Rel rel, Rational bound) {
    rows.push_back({std::move(name), std::move(term), rel, std::move(bound)});
}

std::optional<std::string> exact_decimal(const Rational& value) {
    mpz_class den = value.get_den();
    unsigned twos = 0, fives = 0;
    while (den % 2 == 0) {
        den /= 2;
        ++twos;
    }
    while (den % 5 == 0) {
        den /= 5;
        ++fives;
    }
    if (den != 1) return std::nullopt;
    unsigned digits = std::max(twos, fives);
    mpz_class pow10 = 1;
    for (unsigned i = 0; i < digits; ++i) pow10 *= 10;
    mpz_class scaled = value.get_num() * pow10 / value.get_den();
    bool negative = scaled < 0;
    mpz_class magnitude = abs(scaled);
    std::string body = magnitude.get_str();
    if (digits == 0) return (negative ? "-" : "") + body;
    if (body.size() <= digits) body.insert(0, digits - body.size() + 1, '0');
    body.insert(body.size() - digits, ".");
    while (body.back() == '0') body.pop_back();
    if (body.back() == '.') body.pop_back();
    return (negative ? "-" : "") + body;
}

namespace {

bool all_terminating(const LinearTerm& term, const Rational& bound) {
    if (!exact_decimal(bound)) return false;
    for (const auto& [var, coeff] : term.coeffs())
        if (!exact_decimal(coeff)) return false;
    return true;
}

mpz_class denominator_lcm(const LinearTerm& term, const Rational& bound) {
    mpz_class l = bound.get_den();
    for (const auto& [var, coeff] : term.coeffs()) {
        mpz_class d = coeff.get_den();
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), l.get_mpz_t(), d.get_mpz_t());
        l = l / g * d;
    }
    return l;
}

void emit_expr(std::ostringstream& out, const LinearTerm& term, const Rational& scale,
               const std::function<std::string(int)>& var_name) {
    if (term.empty()) {
        out << "0";
        return;
    }
    bool first = true;
    for (const auto& [var, coeff] : term.coeffs()) {
        Rational c = coeff * scale;
        if (first) {
            if (c < 0) out << "- ";
            first = false;
        } else {
            out << (c < 0 ? " - " : " + ");
        }
        Rational a = abs(c);
        if (a != 1) out << *exact_decimal(a) << " ";
        out << var_name(var);
    }
}

}  // namespace

std::string LpTextWriter::render(const std::function<std::string(int)>& var_name) const {
    std::ostringstream out;
    out << (objective_minimize ? "Minimize" : "Maximize") << "\n obj: ";
    if (objective && !objective->empty()) {
        // Objectives are emitted scaled to integers only if needed.
        Rational scale = all_terminating(*objective, rat(0))
                             ? rat(1)
                             : Rational(denominator_lcm(*objective, rat(0)));
        emit_expr(out, *objective, scale, var_name);
    } else {
        out << "0";
    }
    out << "\nSubject To\n";
    for (const auto& row : rows) {
        Rational scale = all_terminating(row.term, row.bound)
                             ? rat(1)
                             : Rational(denominator_lcm(row.term, row.bound));
        out << " " << row.name << ": ";
        emit_expr(out, row.term, scale, var_name);
        out << (row.rel == Rel::Eq ? " = " : row.rel == Rel::Le ? " <= " : " < ");
        out << *exact_decimal(row.bound * scale) << "\n";
    }
    if (!free_vars.empty()) {
        out << "Bounds\n";
        for (const auto& v : free_vars) out << " " << v << " free\n";
    }
    if (!binary_vars.empty()) {
        out << "Binary\n";
        for (const auto& v : binary_vars) out << " " << v << "\n";
    }
    out << "End\n";
    return out.str();
}

}  // namespace reachkit
