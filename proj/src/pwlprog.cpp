#include "reachkit/pwlprog.hpp"

#include <stdexcept>

namespace reachkit {

std::string PWLProgram::name_of(std::size_t var) const {
    if (var < var_names.size() && !var_names[var].empty()) return var_names[var];
    return "v" + std::to_string(var);
}

std::string PWLProgram::to_lp_text() const {
    // PWL-equalities are dumped as comments ahead of the linear part.
    std::string head;
    for (std::size_t h = 0; h < equalities.size(); ++h) {
        const auto& eq = equalities[h];
        head += "\\ pwl" + std::to_string(h) + ": f" + std::to_string(h) + "(" +
                to_string(eq.constant) + " + ...) = " + name_of(eq.result_var) + " [" +
                std::to_string(eq.f.piece_count()) + " pieces]\n";
    }
    LinearProgram lp;
    lp.var_count = var_count;
    lp.var_names = var_names;
    lp.constraints = linear;
    return head + lp.to_lp_text();
}

std::string PhaseVector::encode(const PWLProgram& program) const {
    mpz_class code = 0;
    for (std::size_t h = 0; h < choices.size(); ++h) {
        code *= static_cast<unsigned long>(program.equalities[h].f.piece_count());
        code += static_cast<unsigned long>(choices[h]);
    }
    return code.get_str();
}

PhaseMode default_phase_mode(const PWLProgram& program) {
    for (const auto& eq : program.equalities)
        if (!eq.f.continuous()) return PhaseMode::Strict;
    return PhaseMode::Closed;
}

PWLProgram build_program(const Network& network, const Specification& input_spec,
                         const Specification& output_spec) {
    if (input_spec.space() != VarSpace::Input || output_spec.space() != VarSpace::Output)
        throw std::invalid_argument("specification variable spaces are swapped");
    if (input_spec.dimension() > network.input_dim())
        throw std::invalid_argument("input specification exceeds network input dimension");
    if (output_spec.dimension() > network.output_dim())
        throw std::invalid_argument("output specification exceeds network output dimension");

    PWLProgram program;
    for (std::size_t i = 0; i < network.input_dim(); ++i) {
        program.input_vars.push_back(program.var_count);
        program.var_names.push_back("x" + std::to_string(i));
        ++program.var_count;
    }
    const auto& layers = network.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        program.node_vars.emplace_back();
        for (std::size_t i = 0; i < layers[l].size(); ++i) {
            program.node_vars.back().push_back(program.var_count);
            program.var_names.push_back(l + 1 == layers.size()
                                            ? "y" + std::to_string(i)
                                            : "h" + std::to_string(l) + "_" + std::to_string(i));
            ++program.var_count;
        }
    }

    auto map_term = [](const LinearTerm& term, const std::vector<std::size_t>& vars) {
        LinearTerm out;
        for (const auto& [var, coeff] : term.coeffs())
            out.add(static_cast<int>(vars[static_cast<std::size_t>(var)]), coeff);
        return out;
    };
    for (const auto& [term, bound] : input_spec.conjuncts())
        program.linear.push_back({map_term(term, program.input_vars), Rel::Le, bound});
    for (const auto& [term, bound] : output_spec.conjuncts())
        program.linear.push_back({map_term(term, program.node_vars.back()), Rel::Le, bound});

    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& prev_vars = l == 0 ? program.input_vars : program.node_vars[l - 1];
        for (std::size_t i = 0; i < layers[l].size(); ++i) {
            const Node& node = layers[l][i];
            PWLEquality eq{node.activation, {}, node.bias, program.node_vars[l][i]};
            for (std::size_t j = 0; j < node.weights.size(); ++j)
                if (node.weights[j] != 0)
                    eq.term.add(static_cast<int>(prev_vars[j]), node.weights[j]);
            program.equalities.push_back(std::move(eq));
        }
    }

    if (program.linear.size() != input_spec.conjuncts().size() + output_spec.conjuncts().size() ||
        program.equalities.size() != network.node_count())
        throw std::logic_error("program size must be conjunct count + node count");
    return program;
}

FixedProgram fix_phases(const PWLProgram& program, const PhaseVector& phases, PhaseMode mode) {
    if (phases.choices.size() != program.equalities.size())
        throw std::invalid_argument("phase vector length does not match equality count");

    FixedProgram fixed;
    fixed.lp.var_count = program.var_count;
    fixed.lp.var_names = program.var_names;
    fixed.lp.constraints = program.linear;

    for (std::size_t h = 0; h < program.equalities.size(); ++h) {
        const PWLEquality& eq = program.equalities[h];
        const std::size_t w = phases.choices[h];
        if (w >= eq.f.piece_count()) throw std::out_of_range("piece index out of range");
        const auto& breakpoints = eq.f.breakpoints();
        std::size_t emitted = 0;

        if (w > 0) {
            // constant + term >= t_{w-1}
            fixed.lp.add(eq.term.negated(), Rel::Le, eq.constant - breakpoints[w - 1]);
            ++emitted;
        }
        if (w + 1 < eq.f.piece_count()) {
            if (mode == PhaseMode::Strict) {
                // constant + term <= t_w + z with a fresh slack z.
                std::size_t z = fixed.lp.add_var("z" + std::to_string(h));
                fixed.slack_vars.push_back(z);
                LinearTerm upper = eq.term;
                upper.add(static_cast<int>(z), rat(-1));
                fixed.lp.add(std::move(upper), Rel::Le, breakpoints[w] - eq.constant);
            } else {
                fixed.lp.add(eq.term, Rel::Le, breakpoints[w] - eq.constant);
            }
            ++emitted;
        }
        // a_w * (constant + term) + b_w = result
        const auto& [slope, intercept] = eq.f.pieces()[w];
        LinearTerm value = eq.term.scaled(slope);
        value.add(static_cast<int>(eq.result_var), rat(-1));
        fixed.lp.add(std::move(value), Rel::Eq, -(slope * eq.constant) - intercept);
        ++emitted;

        if (emitted > 3) throw std::logic_error("phase fixing must emit at most 3 constraints");
    }
    return fixed;
}

LPResult check_phase(const PWLProgram& program, const PhaseVector& phases) {
    return check_phase(program, phases, default_phase_mode(program));
}

LPResult check_phase(const PWLProgram& program, const PhaseVector& phases, PhaseMode mode) {
    FixedProgram fixed = fix_phases(program, phases, mode);
    LPResult result = mode == PhaseMode::Strict ? minimize_slacks(fixed.lp, fixed.slack_vars)
                                                : solve(fixed.lp);
    if (!result.feasible()) return result;

    result.assignment.resize(program.var_count);
    for (const PWLEquality& eq : program.equalities) {
        Rational arg = eq.constant + eq.term.eval(result.assignment);
        if (eq.f.eval(arg) != result.assignment[eq.result_var])
            throw std::logic_error("phase-fixed assignment fails a PWL-equality re-check");
    }
    return result;
}

}  // namespace reachkit
