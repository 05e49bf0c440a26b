#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "reachkit/milp.hpp"
#include "reachkit/oracle.hpp"
#include "reachkit/reductions.hpp"
#include "reachkit/verifier.hpp"

namespace rk = reachkit;
using nlohmann::json;

namespace {

constexpr int kExitReachable = 0;
constexpr int kExitUnreachable = 1;
constexpr int kExitError = 2;

struct SolveArgs {
    std::string network_path, in_spec_path, out_spec_path;
    std::string name_map_path, json_path, milp_out_path;
    unsigned workers = 1;
    bool strict = false;
    std::optional<long> budget_ms;
    std::optional<std::size_t> node_budget;
    std::uint64_t seed = 0;
};

rk::ReachInstance load_instance(const std::string& net_path, const std::string& in_path,
                                const std::string& out_path, const std::string& map_path) {
    rk::Network network = rk::Network::load(net_path);
    std::optional<rk::NameMap> names;
    if (!map_path.empty()) names = rk::NameMap::load(map_path);
    rk::Specification in_spec =
        rk::Specification::load(in_path, rk::VarSpace::Input, nullptr);
    rk::Specification out_spec =
        rk::Specification::load(out_path, rk::VarSpace::Output, names ? &*names : nullptr);
    return rk::ReachInstance(std::move(network), std::move(in_spec), std::move(out_spec));
}

json stats_to_json(const rk::SearchStats& stats) {
    return {{"nodes_explored", stats.nodes_explored},
            {"lp_calls", stats.lp_calls},
            {"wall_ms", stats.wall_ms}};
}

void write_json_report(const std::string& path, const json& report) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report file: " + path);
    out << report.dump(2) << "\n";
}

int run_solve(const SolveArgs& args) {
    rk::ReachInstance instance =
        load_instance(args.network_path, args.in_spec_path, args.out_spec_path,
                      args.name_map_path);
    if (!args.milp_out_path.empty())
        rk::export_lp(rk::encode(instance), args.milp_out_path);

    rk::VerifierConfig config;
    config.workers = args.workers;
    config.force_strict = args.strict;
    config.node_budget = args.node_budget;
    config.time_budget_ms = args.budget_ms;
    if (config.time_budget_ms && *config.time_budget_ms <= 0)
        throw std::runtime_error("time budget must be positive");
    if (config.node_budget && *config.node_budget == 0)
        throw std::runtime_error("node budget must be positive");

    json report = {{"command", "solve"}, {"seed", args.seed}, {"workers", args.workers}};
    rk::ReachResult result = rk::decide(instance, config);
    report["stats"] = stats_to_json(result.stats);
    if (result.reachable) {
        rk::WitnessSizeReport sizes = rk::witness_size_report(result, instance);
        std::cout << "REACHABLE\n";
        std::cout << "witness: " << rk::to_string(result.witness) << "\n";
        std::cout << "witness_bits: " << sizes.witness_bits << "\n";
        std::cout << "instance_bits: " << sizes.instance_bits << "\n";
        std::cout << "nodes_explored: " << result.stats.nodes_explored
                  << " lp_calls: " << result.stats.lp_calls
                  << " wall_ms: " << result.stats.wall_ms << "\n";
        report["verdict"] = "reachable";
        json witness = json::array();
        for (const auto& v : result.witness) witness.push_back(rk::to_string(v));
        report["witness"] = witness;
        report["witness_bits"] = sizes.witness_bits;
        report["instance_bits"] = sizes.instance_bits;
        write_json_report(args.json_path, report);
        return kExitReachable;
    }
    std::cout << "UNREACHABLE\n";
    std::cout << "nodes_explored: " << result.stats.nodes_explored
              << " lp_calls: " << result.stats.lp_calls << " wall_ms: " << result.stats.wall_ms
              << "\n";
    report["verdict"] = "unreachable";
    write_json_report(args.json_path, report);
    return kExitUnreachable;
}

std::string alphabet_string(const rk::Network& network) {
    std::string out = "{";
    rk::RatVec alphabet = network.weight_alphabet();
    for (std::size_t i = 0; i < alphabet.size(); ++i) {
        if (i) out += ", ";
        out += rk::to_string(alphabet[i]);
    }
    return out + "}";
}

int run_gen(const std::string& cnf_path, const std::string& reduction, const std::string& c_text,
            const std::string& d_text, const std::string& out_prefix) {
    rk::CnfFormula formula = rk::CnfFormula::load_dimacs(cnf_path);
    rk::GeneratedInstance generated = [&]() {
        if (reduction == "general") return rk::reduce_general(formula);
        if (reduction == "single-layer") return rk::reduce_single_layer(formula);
        if (reduction == "fanin1") return rk::reduce_fanin1(formula);
        if (reduction == "fanin2") return rk::reduce_fanin2(formula);
        if (reduction == "weights") {
            if (c_text.empty() || d_text.empty())
                throw std::runtime_error("--reduction weights requires -c and -d");
            return rk::reduce_restricted_weights(formula, rk::parse_rational(c_text),
                                                 rk::parse_rational(d_text));
        }
        if (reduction == "nozero") {
            if (c_text.empty()) throw std::runtime_error("--reduction nozero requires -c");
            return rk::reduce_no_zero(formula, rk::parse_rational(c_text));
        }
        throw std::runtime_error("unknown reduction: " + reduction);
    }();

    rk::InstanceFiles files = rk::write_instance(generated, out_prefix);
    const rk::Network& network = generated.instance.network;
    std::cout << "reduction: " << generated.reduction_tag << "\n";
    std::cout << "variables: " << formula.num_vars << " clauses: " << formula.num_clauses()
              << "\n";
    std::cout << "input_dim: " << network.input_dim() << " output_dim: " << network.output_dim()
              << " layers: " << network.depth() << " (stored " << network.layers().size()
              << ")\n";
    std::cout << "widths:";
    for (const auto& layer : network.layers()) std::cout << " " << layer.size();
    std::cout << "\n";
    std::cout << "weight_alphabet: " << alphabet_string(network) << "\n";
    std::cout << "output_spec:\n" << generated.instance.output_spec.to_text(&generated.name_map);
    std::cout << "files: " << files.network_path << " " << files.input_spec_path << " "
              << files.output_spec_path << " " << files.name_map_path << "\n";
    return 0;
}

int run_eval(const std::string& net_path, const std::string& input_text) {
    rk::Network network = rk::Network::load(net_path);
    rk::RatVec input;
    std::string token;
    std::istringstream in(input_text);
    while (std::getline(in, token, ',')) input.push_back(rk::parse_rational(token));
    rk::RatVec output = network.eval(input);
    std::cout << rk::to_string(output) << "\n";
    return 0;
}

int run_transform(const std::string& net_path, const std::string& out_path) {
    rk::Network network = rk::Network::load(net_path);
    rk::Network transformed = rk::to_relu_only(network);
    transformed.save(out_path);
    std::cout << "wrote " << out_path << " (depth " << transformed.depth() << ", widths";
    for (const auto& layer : transformed.layers()) std::cout << " " << layer.size();
    std::cout << ")\n";
    return 0;
}

int run_encode_milp(const std::string& net_path, const std::string& in_path,
                    const std::string& out_path, const std::string& map_path,
                    const std::string& lp_path, bool check, std::size_t cap) {
    rk::ReachInstance instance = load_instance(net_path, in_path, out_path, map_path);
    rk::MILP milp = rk::encode(instance);
    rk::export_lp(milp, lp_path);
    std::cout << "wrote " << lp_path << " (" << milp.vars.size() << " vars, "
              << milp.binary_count() << " binary, " << milp.constraints.size()
              << " constraints)\n";
    if (check) {
        rk::MilpStatus status = rk::check_milp(milp, cap);
        std::cout << (status == rk::MilpStatus::Feasible ? "FEASIBLE" : "INFEASIBLE") << "\n";
    }
    return 0;
}

int run_oracle_sat(const std::string& cnf_path) {
    rk::CnfFormula formula = rk::CnfFormula::load_dimacs(cnf_path);
    rk::SatResult result = rk::sat_bruteforce(formula);
    if (result.satisfiable) {
        std::cout << "SATISFIABLE\nassignment:";
        for (std::size_t i = 0; i < result.assignment->size(); ++i)
            std::cout << " " << ((*result.assignment)[i] ? "1" : "0");
        std::cout << "\n";
    } else {
        std::cout << "UNSATISFIABLE\n";
    }
    return 0;
}

int run_oracle_reach(const std::string& net_path, const std::string& in_path,
                     const std::string& out_path, const std::string& map_path,
                     std::size_t phase_cap) {
    rk::ReachInstance instance = load_instance(net_path, in_path, out_path, map_path);
    rk::BruteforceResult result = rk::reach_bruteforce(instance, phase_cap);
    if (result.reachable) {
        std::cout << "REACHABLE\nwitness: " << rk::to_string(result.witness) << "\n";
        return kExitReachable;
    }
    std::cout << "UNREACHABLE\n";
    return kExitUnreachable;
}

int run_oracle_grid(const std::string& prefix, const std::string& cnf_path) {
    rk::CnfFormula formula = rk::CnfFormula::load_dimacs(cnf_path);
    rk::InstanceFiles files{prefix + ".net.json", prefix + ".in.spec", prefix + ".out.spec",
                            prefix + ".map.json"};
    rk::GeneratedInstance generated = rk::read_instance(files);
    rk::GridCheckReport report = rk::boolean_grid_check(generated, formula);
    std::cout << "assignments: " << report.assignments_checked
              << " satisfying: " << report.satisfying << "\n";
    std::cout << (report.consistent ? "CONSISTENT" : "MISMATCH: " + report.first_mismatch)
              << "\n";
    return report.consistent ? 0 : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact reachability toolkit for piecewise-linear neural networks"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "Decide reachability of an instance");
    solve->add_option("network", solve_args.network_path, "Network JSON file")->required();
    solve->add_option("--in-spec", solve_args.in_spec_path, "Input specification")->required();
    solve->add_option("--out-spec", solve_args.out_spec_path, "Output specification")->required();
    solve->add_option("--name-map", solve_args.name_map_path, "Output name map JSON");
    solve->add_option("--workers", solve_args.workers, "Parallel workers");
    solve->add_flag("--strict", solve_args.strict, "Use the strict phase bounds everywhere");
    solve->add_option("--budget-ms", solve_args.budget_ms, "Wall-clock budget in ms")
        ->envname("REACHKIT_BUDGET_MS");
    solve->add_option("--node-budget", solve_args.node_budget, "Search node budget");
    solve->add_option("--seed", solve_args.seed, "Seed recorded in the report");
    solve->add_option("--json", solve_args.json_path, "Write a JSON report");
    solve->add_option("--milp-out", solve_args.milp_out_path, "Also export the big-M encoding");

    std::string gen_cnf, gen_reduction, gen_c, gen_d, gen_prefix;
    auto* gen = app.add_subcommand("gen", "Compile a 3SAT formula into an instance");
    gen->add_option("cnf", gen_cnf, "DIMACS CNF file")->required();
    gen->add_option("--reduction", gen_reduction,
                    "general|single-layer|fanin1|fanin2|weights|nozero")
        ->required();
    gen->add_option("-c", gen_c, "Weight parameter c (p/q)");
    gen->add_option("-d", gen_d, "Weight parameter d (p/q)");
    gen->add_option("-o,--out", gen_prefix, "Output file prefix")->required();

    std::string eval_net, eval_input;
    auto* eval = app.add_subcommand("eval", "Evaluate a network on an exact input");
    eval->add_option("network", eval_net, "Network JSON file")->required();
    eval->add_option("--input", eval_input, "Comma-separated rationals")->required();

    std::string tr_net, tr_out;
    auto* transform = app.add_subcommand("transform", "Replace hidden identity nodes by ReLU pairs");
    transform->add_option("network", tr_net, "Network JSON file")->required();
    transform->add_option("-o,--out", tr_out, "Output network file")->required();

    std::string milp_net, milp_in, milp_out_spec, milp_map, milp_lp;
    bool milp_check = false;
    std::size_t milp_cap = std::size_t(1) << 16;
    auto* encode_milp = app.add_subcommand("encode-milp", "Export the big-M encoding");
    encode_milp->add_option("network", milp_net, "Network JSON file")->required();
    encode_milp->add_option("--in-spec", milp_in, "Input specification")->required();
    encode_milp->add_option("--out-spec", milp_out_spec, "Output specification")->required();
    encode_milp->add_option("--name-map", milp_map, "Output name map JSON");
    encode_milp->add_option("--milp-out", milp_lp, "LP text output path")->required();
    encode_milp->add_flag("--check", milp_check, "Run the internal feasibility check");
    encode_milp->add_option("--cap", milp_cap, "Binary combination cap for --check");

    auto* oracle = app.add_subcommand("oracle", "Brute-force reference procedures");
    oracle->require_subcommand(1);
    std::string osat_cnf;
    auto* osat = oracle->add_subcommand("sat", "Exhaustive SAT check");
    osat->add_option("cnf", osat_cnf, "DIMACS CNF file")->required();
    std::string oreach_net, oreach_in, oreach_out, oreach_map;
    std::size_t oreach_cap = std::size_t(1) << 16;
    auto* oreach = oracle->add_subcommand("reach", "Exhaustive phase enumeration");
    oreach->add_option("network", oreach_net, "Network JSON file")->required();
    oreach->add_option("--in-spec", oreach_in, "Input specification")->required();
    oreach->add_option("--out-spec", oreach_out, "Output specification")->required();
    oreach->add_option("--name-map", oreach_map, "Output name map JSON");
    oreach->add_option("--phase-cap", oreach_cap, "Phase space cap");
    std::string ogrid_prefix, ogrid_cnf;
    auto* ogrid = oracle->add_subcommand("grid", "Boolean grid check of a generated instance");
    ogrid->add_option("prefix", ogrid_prefix, "Generated instance file prefix")->required();
    ogrid->add_option("--cnf", ogrid_cnf, "DIMACS CNF file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) return run_solve(solve_args);
        if (*gen) return run_gen(gen_cnf, gen_reduction, gen_c, gen_d, gen_prefix);
        if (*eval) return run_eval(eval_net, eval_input);
        if (*transform) return run_transform(tr_net, tr_out);
        if (*encode_milp)
            return run_encode_milp(milp_net, milp_in, milp_out_spec, milp_map, milp_lp,
                                   milp_check, milp_cap);
        if (*oracle) {
            if (*osat) return run_oracle_sat(osat_cnf);
            if (*oreach)
                return run_oracle_reach(oreach_net, oreach_in, oreach_out, oreach_map, oreach_cap);
            if (*ogrid) return run_oracle_grid(ogrid_prefix, ogrid_cnf);
        }
    } catch (const rk::BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
