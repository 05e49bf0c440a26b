#pragma once

#include <random>
#include <vector>

#include "reachkit/reductions.hpp"
#include "reachkit/verifier.hpp"

namespace reachkit {

// Seeded generators for test corpora. Everything here is deterministic in
// the RNG state so corpora are reproducible from one CLI seed.

struct RandomNetworkOptions {
    std::size_t max_inputs = 4;
    std::size_t max_nodes = 8;
    std::size_t max_layers = 3;
    bool allow_general_pwl = true;
    bool allow_discontinuous = true;
};

Rational random_small_rational(std::mt19937_64& rng, long num_range = 8, long max_den = 4);

Network random_network(std::mt19937_64& rng, const RandomNetworkOptions& options = {});

// Random instance with a bounded input box and a partial output box.
ReachInstance random_instance(std::mt19937_64& rng, const RandomNetworkOptions& options = {});

CnfFormula random_formula(std::mt19937_64& rng, std::size_t max_vars, std::size_t max_clauses);

// Every formula with exactly `vars` variables and `clauses` clauses, where a
// clause is a non-decreasing triple of literals and the clause list itself is
// non-decreasing (duplicates allowed): exhaustive up to literal and clause
// order.
std::vector<CnfFormula> exhaustive_formulas(std::size_t vars, std::size_t clauses);

}  // namespace reachkit
