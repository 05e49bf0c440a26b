#pragma once

#include <optional>
#include <vector>

#include "reachkit/reductions.hpp"
#include "reachkit/verifier.hpp"

namespace reachkit {

struct SatResult {
    bool satisfiable = false;
    std::optional<std::vector<bool>> assignment;
};

// Exhaustive over all 2^n assignments; the reference for every reduction
// round-trip. Deliberately naive.
SatResult sat_bruteforce(const CnfFormula& formula, std::size_t var_cap = 20);

struct BruteforceResult {
    bool reachable = false;
    RatVec witness;
    PhaseVector phase;
};

// Exhaustive enumeration of full phase vectors, one phase-fixed LP each.
// Polynomial for a fixed node count and the ground truth decide() is checked
// against.
BruteforceResult reach_bruteforce(const ReachInstance& instance,
                                  std::size_t phase_cap = std::size_t(1) << 16);

struct GridCheckReport {
    std::size_t assignments_checked = 0;
    std::size_t satisfying = 0;
    bool consistent = true;
    std::string first_mismatch;
};

// Evaluates the generated network on every assignment-encoded input and
// checks that the output specification holds exactly for the satisfying
// assignments: the discrete half of each reduction's correctness argument.
GridCheckReport boolean_grid_check(const GeneratedInstance& generated, const CnfFormula& formula,
                                   std::size_t var_cap = 20);

}  // namespace reachkit
