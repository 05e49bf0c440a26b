#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "reachkit/pwlprog.hpp"

namespace reachkit {

struct ReachInstance {
    Network network;
    Specification input_spec;
    Specification output_spec;

    ReachInstance(Network net, Specification in, Specification out);
};

struct VerifierConfig {
    std::optional<std::size_t> node_budget;
    std::optional<long> time_budget_ms;
    unsigned workers = 1;
    bool force_strict = false;
};

struct SearchStats {
    std::size_t nodes_explored = 0;
    std::size_t lp_calls = 0;
    double wall_ms = 0;
};

struct ReachResult {
    bool reachable = false;
    RatVec witness;      // satisfying input, present when reachable
    PhaseVector phase;   // active piece per PWL-equality at the witness
    std::size_t witness_bits = 0;
    SearchStats stats;
};

// Raised when the configured node or time budget runs out; deliberately not
// a verdict.
class BudgetExceeded : public std::runtime_error {
public:
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Exact decision of reachability: depth-first branch and bound over
// activation phases, pruning a partial phase assignment whenever the linear
// relaxation (fixed phases plus both specifications) is infeasible. Every
// reachable verdict carries a witness that has passed check_witness.
ReachResult decide(const ReachInstance& instance, const VerifierConfig& config = {});

// phi_in(x) and phi_out(N(x)) in exact arithmetic.
bool check_witness(const ReachInstance& instance, const RatVec& input);

struct WitnessSizeReport {
    std::size_t witness_bits = 0;
    std::size_t instance_bits = 0;
};

// Pairs the witness bit size with the instance bit size so the polynomial
// witness-bound claim can be charted across a benchmark family.
WitnessSizeReport witness_size_report(const ReachResult& result, const ReachInstance& instance);

// Active piece of every node when the network runs on the given input.
PhaseVector phases_at(const Network& network, const RatVec& input);

std::size_t instance_size_bits(const ReachInstance& instance);

}  // namespace reachkit
