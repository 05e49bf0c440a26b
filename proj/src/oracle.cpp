#include "reachkit/oracle.hpp"

#include <sstream>
#include <stdexcept>

namespace reachkit {

SatResult sat_bruteforce(const CnfFormula& formula, std::size_t var_cap) {
    formula.validate();
    if (formula.num_vars > var_cap)
        throw std::runtime_error("sat_bruteforce variable cap exceeded");
    const std::size_t n = formula.num_vars;
    std::vector<bool> assignment(n, false);
    for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
        for (std::size_t i = 0; i < n; ++i) assignment[i] = (mask >> i) & 1;
        if (formula.satisfied_by(assignment)) return {true, assignment};
    }
    return {false, std::nullopt};
}

BruteforceResult reach_bruteforce(const ReachInstance& instance, std::size_t phase_cap) {
    PWLProgram program =
        build_program(instance.network, instance.input_spec, instance.output_spec);
    std::size_t total = 1;
    for (const auto& eq : program.equalities) {
        const std::size_t pieces = eq.f.piece_count();
        if (total > phase_cap / pieces) throw std::runtime_error("phase space cap exceeded");
        total *= pieces;
    }

    const PhaseMode mode = default_phase_mode(program);
    PhaseVector phases;
    phases.choices.assign(program.equalities.size(), 0);
    while (true) {
        LPResult result = check_phase(program, phases, mode);
        if (result.feasible()) {
            BruteforceResult out;
            out.reachable = true;
            for (std::size_t var : program.input_vars) out.witness.push_back(result.assignment[var]);
            out.phase = phases;
            if (!check_witness(instance, out.witness))
                throw std::logic_error("bruteforce witness failed verification");
            return out;
        }
        std::size_t h = phases.choices.size();
        while (h-- > 0) {
            if (++phases.choices[h] < program.equalities[h].f.piece_count()) break;
            phases.choices[h] = 0;
            if (h == 0) return {};
        }
        if (phases.choices.empty()) return {};
    }
}

GridCheckReport boolean_grid_check(const GeneratedInstance& generated, const CnfFormula& formula,
                                   std::size_t var_cap) {
    formula.validate();
    if (formula.num_vars > var_cap)
        throw std::runtime_error("boolean_grid_check variable cap exceeded");
    const std::size_t n = formula.num_vars;

    GridCheckReport report;
    std::vector<bool> assignment(n, false);
    for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
        for (std::size_t i = 0; i < n; ++i) assignment[i] = (mask >> i) & 1;
        RatVec input = generated.encode_assignment(assignment);
        const bool sat = formula.satisfied_by(assignment);
        const bool in_ok = generated.instance.input_spec.check(input);
        const bool out_ok =
            generated.instance.output_spec.check(generated.instance.network.eval(input));
        ++report.assignments_checked;
        if (sat) ++report.satisfying;
        if (!in_ok || out_ok != sat) {
            report.consistent = false;
            if (report.first_mismatch.empty()) {
                std::ostringstream msg;
                msg << "assignment mask " << mask << ": sat=" << sat << " in_ok=" << in_ok
                    << " out_ok=" << out_ok;
                report.first_mismatch = msg.str();
            }
        }
    }
    return report;
}

}  // namespace reachkit
