#include "reachkit/spec.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace reachkit {

using nlohmann::json;

void LinearTerm::add(int var, const Rational& coeff) {
    if (var < 0) throw std::invalid_argument("negative variable id");
    if (coeff == 0) return;
    auto [it, inserted] = coeffs_.emplace(var, coeff);
    if (!inserted) {
        it->second += coeff;
        if (it->second == 0) coeffs_.erase(it);
    }
}

int LinearTerm::max_var() const { return coeffs_.empty() ? -1 : coeffs_.rbegin()->first; }

Rational LinearTerm::eval(const RatVec& values) const {
    Rational sum = 0;
    for (const auto& [var, coeff] : coeffs_) {
        if (static_cast<std::size_t>(var) >= values.size())
            throw std::invalid_argument("term references variable beyond vector dimension");
        sum += coeff * values[var];
    }
    return sum;
}

LinearTerm LinearTerm::negated() const { return scaled(rat(-1)); }

LinearTerm LinearTerm::scaled(const Rational& factor) const {
    LinearTerm out;
    for (const auto& [var, coeff] : coeffs_) out.add(var, coeff * factor);
    return out;
}

std::string NameMap::name_of(std::size_t index) const {
    for (const auto& [name, idx] : output_names)
        if (idx == index) return name;
    return "y" + std::to_string(index);
}

std::string NameMap::to_json() const {
    json outputs = json::object();
    for (const auto& [name, idx] : output_names) outputs[name] = idx;
    return json{{"outputs", outputs}}.dump(2);
}

NameMap NameMap::from_json(const std::string& text) {
    NameMap map;
    json j = json::parse(text);
    for (const auto& [name, idx] : j.at("outputs").items())
        map.output_names[name] = idx.get<std::size_t>();
    return map;
}

NameMap NameMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open name map file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

void NameMap::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write name map file: " + path);
    out << to_json() << "\n";
}

void Specification::add_le(LinearTerm term, Rational bound) {
    conjuncts_.push_back({std::move(term), std::move(bound)});
}

void Specification::add_ge(const LinearTerm& term, const Rational& bound) {
    add_le(term.negated(), -bound);
}

void Specification::add_eq(const LinearTerm& term, const Rational& bound) {
    add_le(term, bound);
    add_ge(term, bound);
}

Specification Specification::top(VarSpace space) {
    // x + (-x) = 0 over any variable; the term cancels to zero.
    Specification spec(space);
    spec.add_eq(LinearTerm{}, rat(0));
    return spec;
}

Specification Specification::bottom(VarSpace space) {
    // x + (-x) = 1, unsatisfiable.
    Specification spec(space);
    spec.add_eq(LinearTerm{}, rat(1));
    return spec;
}

Specification Specification::box(VarSpace space,
                                 const std::vector<std::pair<Rational, Rational>>& bounds) {
    Specification spec(space);
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        LinearTerm t;
        t.add(static_cast<int>(i), rat(1));
        spec.add_ge(t, bounds[i].first);
        spec.add_le(t, bounds[i].second);
    }
    return spec;
}

bool Specification::check(const RatVec& values) const {
    for (const auto& [term, bound] : conjuncts_)
        if (!(term.eval(values) <= bound)) return false;
    return true;
}

bool Specification::simple() const {
    // Vacuous conjuncts count as simple: the constants true/false lower to
    // x + (-x) compared against a bound, which cancels to an empty term.
    return std::all_of(conjuncts_.begin(), conjuncts_.end(),
                       [](const Conjunct& c) { return c.term.var_count() <= 1; });
}

std::size_t Specification::dimension() const {
    int max_var = -1;
    for (const auto& c : conjuncts_) max_var = std::max(max_var, c.term.max_var());
    return static_cast<std::size_t>(max_var + 1);
}

namespace {

std::string var_name(VarSpace space, std::size_t index, const NameMap* names) {
    if (space == VarSpace::Input) return "x" + std::to_string(index);
    if (names) return names->name_of(index);
    return "y" + std::to_string(index);
}

std::size_t resolve_var(const std::string& token, VarSpace space, const NameMap* names,
                        std::size_t line_no) {
    auto fail = [&](const std::string& why) -> std::size_t {
        throw std::invalid_argument("spec line " + std::to_string(line_no) + ": " + why + ": '" +
                                    token + "'");
    };
    if (token.empty() || !std::isalpha(static_cast<unsigned char>(token[0])))
        return fail("bad variable token");
    if (space == VarSpace::Input) {
        if (token[0] != 'x' || token.size() < 2) return fail("input variables are x<i>");
        for (std::size_t i = 1; i < token.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(token[i])))
                return fail("input variables are x<i>");
        return std::stoul(token.substr(1));
    }
    if (names) {
        auto it = names->output_names.find(token);
        if (it != names->output_names.end()) return it->second;
        return fail("unknown output variable (not in name map)");
    }
    if (token[0] != 'y' || token.size() < 2) return fail("output variables are y<i>");
    for (std::size_t i = 1; i < token.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(token[i])))
            return fail("output variables are y<i>");
    return std::stoul(token.substr(1));
}

}  // namespace

std::string Specification::to_text(const NameMap* names) const {
    std::ostringstream out;
    for (const auto& [term, bound] : conjuncts_) {
        if (term.empty()) {
            out << "0*" << var_name(space_, 0, names);
        } else {
            bool first = true;
            for (const auto& [var, coeff] : term.coeffs()) {
                if (!first) out << " + ";
                out << to_string(coeff) << "*" << var_name(space_, var, names);
                first = false;
            }
        }
        out << " <= " << to_string(bound) << "\n";
    }
    return out.str();
}

Specification Specification::parse(const std::string& text, VarSpace space, const NameMap* names) {
    Specification spec(space);
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream tokens(line);
        std::vector<std::string> parts;
        std::string tok;
        while (tokens >> tok) parts.push_back(tok);
        if (parts.empty()) continue;
        auto fail = [&](const std::string& why) {
            throw std::invalid_argument("spec line " + std::to_string(line_no) + ": " + why);
        };
        // c*var (+ c*var)* (<=|>=|==) bound
        if (parts.size() < 3 || parts.size() % 2 != 1) fail("malformed conjunct");
        const std::string& op = parts[parts.size() - 2];
        if (op != "<=" && op != ">=" && op != "==") fail("expected <=, >= or == before the bound");
        Rational bound = parse_rational(parts.back());
        LinearTerm term;
        for (std::size_t i = 0; i + 2 < parts.size(); i += 2) {
            if (i > 0 && parts[i - 1] != "+") fail("terms must be joined by +");
            auto star = parts[i].find('*');
            if (star == std::string::npos) fail("terms must look like c*x<i>");
            Rational coeff = parse_rational(parts[i].substr(0, star));
            std::size_t var = resolve_var(parts[i].substr(star + 1), space, names, line_no);
            term.add(static_cast<int>(var), coeff);
        }
        if (op == "<=")
            spec.add_le(std::move(term), std::move(bound));
        else if (op == ">=")
            spec.add_ge(term, bound);
        else
            spec.add_eq(term, bound);
    }
    return spec;
}

Specification Specification::load(const std::string& path, VarSpace space, const NameMap* names) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open specification file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), space, names);
}

void Specification::save(const std::string& path, const NameMap* names) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write specification file: " + path);
    out << to_text(names);
}

std::size_t Specification::size_bits() const {
    std::size_t bits = 0;
    for (const auto& [term, bound] : conjuncts_) {
        for (const auto& [var, coeff] : term.coeffs()) bits += rational_bits(coeff);
        bits += rational_bits(bound);
    }
    return bits;
}

}  // namespace reachkit
