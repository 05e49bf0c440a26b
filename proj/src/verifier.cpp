#include "reachkit/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <thread>
#include <utility>

namespace reachkit {

ReachInstance::ReachInstance(Network net, Specification in, Specification out)
    : network(std::move(net)), input_spec(std::move(in)), output_spec(std::move(out)) {
    if (input_spec.space() != VarSpace::Input || output_spec.space() != VarSpace::Output)
        throw std::invalid_argument("specification variable spaces are swapped");
    if (input_spec.dimension() > network.input_dim())
        throw std::invalid_argument("input specification exceeds network input dimension");
    if (output_spec.dimension() > network.output_dim())
        throw std::invalid_argument("output specification exceeds network output dimension");
}

bool check_witness(const ReachInstance& instance, const RatVec& input) {
    if (input.size() != instance.network.input_dim())
        throw std::invalid_argument("witness dimension mismatch");
    if (!instance.input_spec.check(input)) return false;
    return instance.output_spec.check(instance.network.eval(input));
}

PhaseVector phases_at(const Network& network, const RatVec& input) {
    PhaseVector phases;
    std::vector<RatVec> values = network.eval_layers(input);
    const RatVec* prev = &input;
    for (std::size_t l = 0; l < network.layers().size(); ++l) {
        for (const Node& node : network.layers()[l]) {
            Rational pre = node.bias;
            for (std::size_t j = 0; j < node.weights.size(); ++j)
                if (node.weights[j] != 0) pre += node.weights[j] * (*prev)[j];
            phases.choices.push_back(node.activation.piece_index(pre));
        }
        prev = &values[l];
    }
    return phases;
}

std::size_t instance_size_bits(const ReachInstance& instance) {
    return instance.network.size_bits() + instance.input_spec.size_bits() +
           instance.output_spec.size_bits();
}

WitnessSizeReport witness_size_report(const ReachResult& result, const ReachInstance& instance) {
    if (!result.reachable)
        throw std::invalid_argument("witness size report requires a reachable result");
    return {result.witness_bits, instance_size_bits(instance)};
}

namespace {

struct Affine {
    LinearTerm term;
    Rational constant;
};

// Relaxation with equality constraints eliminated by exact substitution, so
// the LP only sees genuine inequality rows. Networks are mostly identity
// plumbing and equalities would otherwise dominate the tableau. Solutions are
// expanded back to the full variable set; decide() re-verifies every witness
// independently of this machinery.
class Relaxation {
public:
    explicit Relaxation(std::size_t var_count) : var_count_(var_count) {}

    bool contradictory() const { return contradictory_; }

    void add(const LinearTerm& term, Rel rel, const Rational& bound) {
        if (contradictory_) return;
        Affine reduced = substitute(term);
        Rational rhs = bound - reduced.constant;
        if (rel == Rel::Eq) {
            eliminate(std::move(reduced.term), std::move(rhs));
            return;
        }
        if (reduced.term.empty()) {
            if (!(rel == Rel::Le ? Rational(0) <= rhs : Rational(0) < rhs)) contradictory_ = true;
            return;
        }
        if (rel == Rel::Le) {
            // A row together with its mirror image is an equality in disguise;
            // specifications arrive lowered to such pairs.
            LinearTerm mirror = reduced.term.negated();
            for (std::size_t i = 0; i < rows_.size(); ++i) {
                if (rows_[i].rel == Rel::Le && rows_[i].bound == -rhs && rows_[i].term == mirror) {
                    rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
                    eliminate(std::move(reduced.term), std::move(rhs));
                    return;
                }
            }
        }
        rows_.push_back({std::move(reduced.term), rel, std::move(rhs)});
    }

    std::optional<RatVec> solve(std::size_t* lp_calls) const {
        if (contradictory_) return std::nullopt;
        std::map<int, std::size_t> compact;
        for (const auto& row : rows_)
            for (const auto& [var, coeff] : row.term.coeffs()) compact.emplace(var, 0);
        LinearProgram lp;
        for (auto& [var, id] : compact) id = lp.add_var();
        for (const auto& row : rows_) {
            LinearTerm t;
            for (const auto& [var, coeff] : row.term.coeffs())
                t.add(static_cast<int>(compact.at(var)), coeff);
            lp.add(std::move(t), row.rel, row.bound);
        }
        ++*lp_calls;
        LPResult res = reachkit::solve(lp);
        if (!res.feasible()) return std::nullopt;

        // Free variables outside every row default to zero.
        RatVec full(var_count_, Rational(0));
        for (const auto& [var, id] : compact)
            full[static_cast<std::size_t>(var)] = res.assignment[id];
        for (const auto& [var, expr] : substitutions_)
            full[static_cast<std::size_t>(var)] = expr.constant + expr.term.eval(full);
        return full;
    }

private:
    struct Row {
        LinearTerm term;
        Rel rel;
        Rational bound;
    };

    std::size_t var_count_;
    bool contradictory_ = false;
    std::vector<Row> rows_;
    std::map<int, Affine> substitutions_;  // every expression fully substituted

    Affine substitute(const LinearTerm& term) const {
        Affine out;
        for (const auto& [var, coeff] : term.coeffs()) {
            auto it = substitutions_.find(var);
            if (it == substitutions_.end()) {
                out.term.add(var, coeff);
            } else {
                out.constant += coeff * it->second.constant;
                for (const auto& [v2, c2] : it->second.term.coeffs()) out.term.add(v2, coeff * c2);
            }
        }
        return out;
    }

    static void rewrite(LinearTerm& term, int pivot, const Rational& factor, const Affine& expr) {
        LinearTerm rewritten;
        for (const auto& [var, coeff] : term.coeffs())
            if (var != pivot) rewritten.add(var, coeff);
        for (const auto& [var, coeff] : expr.term.coeffs()) rewritten.add(var, factor * coeff);
        term = std::move(rewritten);
    }

    void eliminate(LinearTerm term, Rational rhs) {
        if (term.empty()) {
            if (rhs != 0) contradictory_ = true;
            return;
        }
        // Pivot on the highest variable id: node variables come after inputs,
        // so inputs tend to stay free and the witness projection stays direct.
        const int pivot = term.max_var();
        const Rational pivot_coeff = term.coeffs().at(pivot);
        Affine expr;
        expr.constant = rhs / pivot_coeff;
        for (const auto& [var, coeff] : term.coeffs())
            if (var != pivot) expr.term.add(var, -coeff / pivot_coeff);

        for (auto& [var, sub] : substitutions_) {
            auto it = sub.term.coeffs().find(pivot);
            if (it == sub.term.coeffs().end()) continue;
            const Rational factor = it->second;
            rewrite(sub.term, pivot, factor, expr);
            sub.constant += factor * expr.constant;
        }
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            auto it = rows_[i].term.coeffs().find(pivot);
            if (it == rows_[i].term.coeffs().end()) continue;
            const Rational factor = it->second;
            rewrite(rows_[i].term, pivot, factor, expr);
            rows_[i].bound -= factor * expr.constant;
            if (rows_[i].term.empty()) {
                if (!(rows_[i].rel == Rel::Le ? Rational(0) <= rows_[i].bound
                                              : Rational(0) < rows_[i].bound))
                    contradictory_ = true;
                rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
                --i;
            }
        }
        substitutions_.emplace(pivot, std::move(expr));
    }
};

class Search {
public:
    Search(const ReachInstance& instance, const VerifierConfig& config)
        : instance_(instance),
          config_(config),
          program_(build_program(instance.network, instance.input_spec, instance.output_spec)),
          mode_(config.force_strict ? PhaseMode::Strict : default_phase_mode(program_)),
          start_(std::chrono::steady_clock::now()) {
        for (std::size_t h = 0; h < program_.equalities.size(); ++h)
            if (program_.equalities[h].f.piece_count() > 1) branchable_.push_back(h);
    }

    ReachResult run() {
        Relaxation root(program_.var_count);
        for (const auto& c : program_.linear) root.add(c.term, c.rel, c.bound);
        for (std::size_t h = 0; h < program_.equalities.size(); ++h)
            if (program_.equalities[h].f.piece_count() == 1) add_phase(root, h, 0);

        std::optional<ReachResult> found;
        if (config_.workers <= 1 || branchable_.empty()) {
            found = explore(root, 0, SIZE_MAX, stats_);
        } else {
            found = explore_parallel(root);
        }

        ReachResult result;
        if (found) result = std::move(*found);
        result.stats = stats_;
        result.stats.wall_ms = elapsed_ms();
        return result;
    }

private:
    const ReachInstance& instance_;
    const VerifierConfig& config_;
    PWLProgram program_;
    PhaseMode mode_;
    std::vector<std::size_t> branchable_;
    std::chrono::steady_clock::time_point start_;
    SearchStats stats_;

    std::mutex mutex_;
    std::atomic<std::size_t> shared_nodes_{0};
    std::atomic<std::size_t> best_found_index_{SIZE_MAX};
    std::atomic<bool> abort_all_{false};
    std::exception_ptr worker_error_;

    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

    void charge_node(SearchStats& stats) {
        ++stats.nodes_explored;
        const std::size_t total =
            config_.workers > 1 ? ++shared_nodes_ : stats.nodes_explored;
        if (config_.node_budget && total > *config_.node_budget)
            throw BudgetExceeded("node budget exceeded after " + std::to_string(total) + " nodes");
        if (config_.time_budget_ms && elapsed_ms() > static_cast<double>(*config_.time_budget_ms))
            throw BudgetExceeded("time budget exceeded");
    }

    void add_phase(Relaxation& relaxation, std::size_t equality, std::size_t piece) const {
        const PWLEquality& eq = program_.equalities[equality];
        const auto& breakpoints = eq.f.breakpoints();
        if (piece > 0)
            relaxation.add(eq.term.negated(), Rel::Le, eq.constant - breakpoints[piece - 1]);
        if (piece + 1 < eq.f.piece_count()) {
            const Rel upper = mode_ == PhaseMode::Strict ? Rel::Lt : Rel::Le;
            relaxation.add(eq.term, upper, breakpoints[piece] - eq.constant);
        }
        const auto& [slope, intercept] = eq.f.pieces()[piece];
        LinearTerm value = eq.term.scaled(slope);
        value.add(static_cast<int>(eq.result_var), rat(-1));
        relaxation.add(value, Rel::Eq, -(slope * eq.constant) - intercept);
    }

    RatVec project_inputs(const RatVec& assignment) const {
        RatVec input;
        input.reserve(program_.input_vars.size());
        for (std::size_t var : program_.input_vars) input.push_back(assignment[var]);
        return input;
    }

    ReachResult make_result(RatVec witness) const {
        ReachResult result;
        result.reachable = true;
        result.phase = phases_at(instance_.network, witness);
        result.witness_bits = vector_bits(witness);
        result.witness = std::move(witness);
        if (!check_witness(instance_, result.witness))
            throw std::logic_error("internal error: unverified witness");
        return result;
    }

    // Relaxation-guided piece first, the rest by descending index (active
    // side first for ReLU).
    std::vector<std::size_t> piece_order(const PWLEquality& eq, const Rational& relaxed_arg) const {
        std::vector<std::size_t> order;
        order.push_back(eq.f.piece_index(relaxed_arg));
        for (std::size_t p = eq.f.piece_count(); p-- > 0;)
            if (p != order.front()) order.push_back(p);
        return order;
    }

    std::optional<ReachResult> explore(const Relaxation& relaxation, std::size_t depth,
                                       std::size_t root_index, SearchStats& stats) {
        if (abort_all_.load(std::memory_order_relaxed)) return std::nullopt;
        // Frontier entries left of a found witness must finish; everything to
        // the right is dead.
        if (root_index != SIZE_MAX && best_found_index_.load() < root_index) return std::nullopt;
        charge_node(stats);
        auto assignment = relaxation.solve(&stats.lp_calls);
        if (!assignment) return std::nullopt;

        RatVec input = project_inputs(*assignment);
        if (check_witness(instance_, input)) return make_result(std::move(input));
        if (depth == branchable_.size())
            throw std::logic_error("fully fixed feasible phase must yield a witness");

        const std::size_t h = branchable_[depth];
        const PWLEquality& eq = program_.equalities[h];
        const Rational arg = eq.constant + eq.term.eval(*assignment);
        for (std::size_t piece : piece_order(eq, arg)) {
            Relaxation child = relaxation;
            add_phase(child, h, piece);
            if (auto res = explore(child, depth + 1, root_index, stats)) return res;
        }
        return std::nullopt;
    }

    // The root is handled exactly like the sequential search (solve, witness
    // test, guided child order); the resulting frontier is handed out to
    // workers in order. A worker that finds a witness publishes its frontier
    // index; lower-indexed entries still run to completion, so verdict and
    // witness equal the sequential ones independent of timing and worker
    // count.
    std::optional<ReachResult> explore_parallel(const Relaxation& root) {
        charge_node(stats_);
        auto assignment = root.solve(&stats_.lp_calls);
        if (!assignment) return std::nullopt;
        RatVec input = project_inputs(*assignment);
        if (check_witness(instance_, input)) return make_result(std::move(input));

        const std::size_t h = branchable_.front();
        const PWLEquality& eq = program_.equalities[h];
        const Rational arg = eq.constant + eq.term.eval(*assignment);
        std::vector<Relaxation> frontier;
        for (std::size_t p : piece_order(eq, arg)) {
            Relaxation child = root;
            add_phase(child, h, p);
            frontier.push_back(std::move(child));
        }

        std::vector<std::optional<ReachResult>> results(frontier.size());
        std::size_t next = 0;
        auto worker = [&]() {
            SearchStats local;
            try {
                while (true) {
                    std::size_t index;
                    {
                        std::lock_guard<std::mutex> lock(mutex_);
                        if (next >= frontier.size()) break;
                        index = next++;
                    }
                    if (index > best_found_index_.load()) continue;
                    auto res = explore(frontier[index], 1, index, local);
                    if (res) {
                        std::lock_guard<std::mutex> lock(mutex_);
                        results[index] = std::move(res);
                        std::size_t expected = best_found_index_.load();
                        while (index < expected &&
                               !best_found_index_.compare_exchange_weak(expected, index)) {
                        }
                    }
                }
            } catch (...) {
                {
                    std::lock_guard<std::mutex> lock(mutex_);
                    if (!worker_error_) worker_error_ = std::current_exception();
                }
                abort_all_.store(true);
            }
            std::lock_guard<std::mutex> lock(mutex_);
            stats_.nodes_explored += local.nodes_explored;
            stats_.lp_calls += local.lp_calls;
        };

        std::vector<std::thread> threads;
        const unsigned count =
            static_cast<unsigned>(std::min<std::size_t>(config_.workers, frontier.size()));
        for (unsigned t = 0; t < count; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
        if (worker_error_) std::rethrow_exception(worker_error_);
        for (auto& res : results)
            if (res) return std::move(*res);
        return std::nullopt;
    }
};

}  // namespace

ReachResult decide(const ReachInstance& instance, const VerifierConfig& config) {
    return Search(instance, config).run();
}

}  // namespace reachkit
