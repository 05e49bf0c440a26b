#include "reachkit/milp.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <stdexcept>

#include "reachkit/lp_format.hpp"

namespace reachkit {

namespace {

std::vector<Interval> input_box(const Network& network, const Specification& input_spec) {
    const std::size_t dim = network.input_dim();
    std::vector<std::optional<Rational>> lo(dim), hi(dim);
    for (const auto& [term, bound] : input_spec.conjuncts()) {
        if (term.var_count() != 1) continue;  // only axis-aligned conjuncts bound the box
        const auto& [var, coeff] = *term.coeffs().begin();
        Rational limit = bound / coeff;
        if (coeff > 0) {
            if (!hi[var] || limit < *hi[var]) hi[var] = limit;
        } else {
            if (!lo[var] || limit > *lo[var]) lo[var] = limit;
        }
    }
    std::vector<Interval> box;
    for (std::size_t i = 0; i < dim; ++i) {
        if (!lo[i]) throw UnboundedInputError(i, "lower");
        if (!hi[i]) throw UnboundedInputError(i, "upper");
        box.push_back({*lo[i], *hi[i]});
    }
    return box;
}

Interval pwl_image(const PWLFunction& f, const Interval& pre) {
    // Candidate values at the interval ends and at every breakpoint inside,
    // taken from both adjacent pieces; for discontinuous functions this may
    // widen the image, which is fine for big-M purposes.
    RatVec candidates{f.eval(pre.lo), f.eval(pre.hi)};
    const auto& breakpoints = f.breakpoints();
    for (std::size_t j = 0; j < breakpoints.size(); ++j) {
        if (breakpoints[j] < pre.lo || breakpoints[j] > pre.hi) continue;
        candidates.push_back(f.eval_piece(j, breakpoints[j]));
        candidates.push_back(f.eval_piece(j + 1, breakpoints[j]));
    }
    Interval image{candidates.front(), candidates.front()};
    for (const auto& v : candidates) {
        if (v < image.lo) image.lo = v;
        if (v > image.hi) image.hi = v;
    }
    return image;
}

}  // namespace

IntervalBounds compute_bounds(const Network& network, const Specification& input_spec) {
    IntervalBounds bounds;
    bounds.inputs = input_box(network, input_spec);

    const std::vector<Interval>* prev = &bounds.inputs;
    for (const auto& layer : network.layers()) {
        std::vector<Interval> pre, post;
        for (const Node& node : layer) {
            Interval acc{node.bias, node.bias};
            for (std::size_t j = 0; j < node.weights.size(); ++j) {
                const Rational& w = node.weights[j];
                if (w == 0) continue;
                if (w > 0) {
                    acc.lo += w * (*prev)[j].lo;
                    acc.hi += w * (*prev)[j].hi;
                } else {
                    acc.lo += w * (*prev)[j].hi;
                    acc.hi += w * (*prev)[j].lo;
                }
            }
            post.push_back(pwl_image(node.activation, acc));
            pre.push_back(std::move(acc));
        }
        bounds.pre_activation.push_back(std::move(pre));
        bounds.post_activation.push_back(std::move(post));
        prev = &bounds.post_activation.back();
    }
    return bounds;
}

std::size_t MILP::binary_count() const {
    return static_cast<std::size_t>(
        std::count_if(vars.begin(), vars.end(),
                      [](const Var& v) { return v.kind == VarKind::Binary; }));
}

MILP encode(const ReachInstance& instance) {
    return encode(instance, compute_bounds(instance.network, instance.input_spec));
}

MILP encode(const ReachInstance& instance, const IntervalBounds& bounds) {
    const Network& network = instance.network;
    MILP milp;
    auto add_var = [&](const std::string& name, MILP::VarKind kind) {
        milp.vars.push_back({name, kind});
        return milp.vars.size() - 1;
    };

    for (std::size_t i = 0; i < network.input_dim(); ++i)
        milp.input_vars.push_back(add_var("x" + std::to_string(i), MILP::VarKind::Continuous));

    for (std::size_t l = 0; l < network.layers().size(); ++l) {
        milp.node_output_vars.emplace_back();
        const auto& prev_vars = l == 0 ? milp.input_vars : milp.node_output_vars[l - 1];
        for (std::size_t i = 0; i < network.layers()[l].size(); ++i) {
            const Node& node = network.layers()[l][i];
            const std::string tag = std::to_string(l) + "_" + std::to_string(i);
            const Interval& pre = bounds.pre_activation[l][i];
            const Interval& post = bounds.post_activation[l][i];
            const int li = static_cast<int>(l), ni = static_cast<int>(i);

            LinearTerm arg;  // sum of weighted previous outputs; bias goes to the bound side
            for (std::size_t j = 0; j < node.weights.size(); ++j)
                if (node.weights[j] != 0)
                    arg.add(static_cast<int>(prev_vars[j]), node.weights[j]);

            if (node.activation.is_identity()) {
                std::size_t y = add_var("y" + tag, MILP::VarKind::Continuous);
                milp.node_output_vars[l].push_back(y);
                LinearTerm t = arg;
                t.add(static_cast<int>(y), rat(-1));
                milp.constraints.push_back(
                    {std::move(t), Rel::Eq, -node.bias, MILP::Role::NodeEquality, li, ni});
                continue;
            }
            if (node.activation.is_relu()) {
                std::size_t y = add_var("y" + tag, MILP::VarKind::Continuous);
                std::size_t s = add_var("s" + tag, MILP::VarKind::Continuous);
                std::size_t z = add_var("z" + tag, MILP::VarKind::Binary);
                milp.node_output_vars[l].push_back(y);
                milp.groups.push_back({{z}});
                const Rational m_plus = std::max(rat(0), pre.hi);
                const Rational m_minus = std::max(rat(0), Rational(-pre.lo));

                LinearTerm split = arg;
                split.add(static_cast<int>(y), rat(-1));
                split.add(static_cast<int>(s), rat(1));
                milp.constraints.push_back(
                    {std::move(split), Rel::Eq, -node.bias, MILP::Role::ReluSplit, li, ni});
                LinearTerm ypos;
                ypos.add(static_cast<int>(y), rat(-1));
                milp.constraints.push_back(
                    {std::move(ypos), Rel::Le, rat(0), MILP::Role::ReluNonNegY, li, ni});
                LinearTerm spos;
                spos.add(static_cast<int>(s), rat(-1));
                milp.constraints.push_back(
                    {std::move(spos), Rel::Le, rat(0), MILP::Role::ReluNonNegS, li, ni});
                // y <= M+ (1 - z)  and  s <= M- z
                LinearTerm yup;
                yup.add(static_cast<int>(y), rat(1));
                yup.add(static_cast<int>(z), m_plus);
                milp.constraints.push_back(
                    {std::move(yup), Rel::Le, m_plus, MILP::Role::ReluUpperY, li, ni});
                LinearTerm sup;
                sup.add(static_cast<int>(s), rat(1));
                sup.add(static_cast<int>(z), -m_minus);
                milp.constraints.push_back(
                    {std::move(sup), Rel::Le, rat(0), MILP::Role::ReluUpperS, li, ni});
                continue;
            }

            // General piecewise-linear node: one indicator per piece.
            std::size_t y = add_var("y" + tag, MILP::VarKind::Continuous);
            milp.node_output_vars[l].push_back(y);
            MILP::IndicatorGroup group;
            LinearTerm one;
            for (std::size_t p = 0; p < node.activation.piece_count(); ++p) {
                std::size_t z =
                    add_var("z" + tag + "_p" + std::to_string(p), MILP::VarKind::Binary);
                group.vars.push_back(z);
                one.add(static_cast<int>(z), rat(1));
            }
            milp.constraints.push_back(
                {std::move(one), Rel::Eq, rat(1), MILP::Role::PieceExactlyOne, li, ni});

            const auto& breakpoints = node.activation.breakpoints();
            for (std::size_t p = 0; p < node.activation.piece_count(); ++p) {
                const std::size_t z = group.vars[p];
                const auto& [slope, intercept] = node.activation.pieces()[p];
                if (p > 0) {
                    // arg + bias >= t_{p-1} - M (1 - z)
                    const Rational big = std::max(rat(0), Rational(breakpoints[p - 1] - pre.lo));
                    LinearTerm t = arg.negated();
                    t.add(static_cast<int>(z), big);
                    milp.constraints.push_back({std::move(t), Rel::Le,
                                                node.bias - breakpoints[p - 1] + big,
                                                MILP::Role::PieceLower, li, ni});
                }
                if (p + 1 < node.activation.piece_count()) {
                    // arg + bias <= t_p + M (1 - z)
                    const Rational big = std::max(rat(0), Rational(pre.hi - breakpoints[p]));
                    LinearTerm t = arg;
                    t.add(static_cast<int>(z), big);
                    milp.constraints.push_back({std::move(t), Rel::Le,
                                                breakpoints[p] - node.bias + big,
                                                MILP::Role::PieceUpper, li, ni});
                }
                // y within M of the piece value, tight when z = 1.
                Interval piece_range{slope * pre.lo + intercept, slope * pre.hi + intercept};
                if (piece_range.lo > piece_range.hi) std::swap(piece_range.lo, piece_range.hi);
                const Rational m_up = std::max(rat(0), Rational(post.hi - piece_range.lo));
                const Rational m_down = std::max(rat(0), Rational(piece_range.hi - post.lo));
                LinearTerm up;  // y - slope*arg + M_up*z <= slope*bias + intercept + M_up
                up.add(static_cast<int>(y), rat(1));
                for (const auto& [var, coeff] : arg.coeffs()) up.add(var, -slope * coeff);
                up.add(static_cast<int>(z), m_up);
                milp.constraints.push_back({std::move(up), Rel::Le,
                                            slope * node.bias + intercept + m_up,
                                            MILP::Role::PieceValueUpper, li, ni});
                LinearTerm down;  // slope*arg - y + M_down*z <= -slope*bias - intercept + M_down
                for (const auto& [var, coeff] : arg.coeffs()) down.add(var, slope * coeff);
                down.add(static_cast<int>(y), rat(-1));
                down.add(static_cast<int>(z), m_down);
                milp.constraints.push_back({std::move(down), Rel::Le,
                                            -(slope * node.bias) - intercept + m_down,
                                            MILP::Role::PieceValueLower, li, ni});
            }
            milp.groups.push_back(std::move(group));
        }
    }

    auto map_term = [](const LinearTerm& term, const std::vector<std::size_t>& vars) {
        LinearTerm out;
        for (const auto& [var, coeff] : term.coeffs())
            out.add(static_cast<int>(vars[static_cast<std::size_t>(var)]), coeff);
        return out;
    };
    for (const auto& [term, bound] : instance.input_spec.conjuncts())
        milp.constraints.push_back(
            {map_term(term, milp.input_vars), Rel::Le, bound, MILP::Role::InputSpec, -1, -1});
    for (const auto& [term, bound] : instance.output_spec.conjuncts())
        milp.constraints.push_back({map_term(term, milp.node_output_vars.back()), Rel::Le, bound,
                                    MILP::Role::OutputSpec, -1, -1});
    return milp;
}

std::string MILP::to_lp_text() const {
    LpTextWriter writer;
    for (std::size_t i = 0; i < constraints.size(); ++i)
        writer.add_row("c" + std::to_string(i), constraints[i].term, constraints[i].rel,
                       constraints[i].bound);
    for (const auto& var : vars)
        (var.kind == VarKind::Binary ? writer.binary_vars : writer.free_vars).push_back(var.name);
    return writer.render([this](int v) { return vars[static_cast<std::size_t>(v)].name; });
}

void export_lp(const MILP& milp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write LP file: " + path);
    out << milp.to_lp_text();
}

MilpStatus check_milp(const MILP& milp, std::size_t combination_cap) {
    // Group choices: a singleton group is a free binary (2 choices), a piece
    // group pins exactly one indicator.
    std::vector<std::size_t> radix;
    for (const auto& group : milp.groups)
        radix.push_back(group.vars.size() == 1 ? 2 : group.vars.size());

    std::size_t combos = 1;
    for (std::size_t r : radix) {
        if (combos > combination_cap / std::max<std::size_t>(r, 1))
            throw std::runtime_error("binary combination cap exceeded");
        combos *= r;
    }

    std::vector<std::size_t> choice(radix.size(), 0);
    while (true) {
        RatVec binary_value(milp.vars.size(), Rational(0));
        for (std::size_t g = 0; g < milp.groups.size(); ++g) {
            const auto& group = milp.groups[g];
            if (group.vars.size() == 1)
                binary_value[group.vars[0]] = Rational(static_cast<long>(choice[g]));
            else
                binary_value[group.vars[choice[g]]] = 1;
        }

        LinearProgram lp;
        std::vector<std::size_t> continuous(milp.vars.size(), SIZE_MAX);
        for (std::size_t v = 0; v < milp.vars.size(); ++v)
            if (milp.vars[v].kind == MILP::VarKind::Continuous)
                continuous[v] = lp.add_var(milp.vars[v].name);
        bool trivially_infeasible = false;
        for (const auto& c : milp.constraints) {
            LinearTerm t;
            Rational bound = c.bound;
            for (const auto& [var, coeff] : c.term.coeffs()) {
                if (continuous[static_cast<std::size_t>(var)] == SIZE_MAX)
                    bound -= coeff * binary_value[static_cast<std::size_t>(var)];
                else
                    t.add(static_cast<int>(continuous[static_cast<std::size_t>(var)]), coeff);
            }
            if (t.empty()) {
                if (c.rel == Rel::Eq ? bound != 0 : bound < 0) {
                    trivially_infeasible = true;
                    break;
                }
                continue;
            }
            lp.add(std::move(t), c.rel, std::move(bound));
        }
        if (!trivially_infeasible && solve(lp).feasible()) return MilpStatus::Feasible;

        std::size_t g = 0;
        for (; g < radix.size(); ++g) {
            if (++choice[g] < radix[g]) break;
            choice[g] = 0;
        }
        if (g == radix.size()) break;
        if (radix.empty()) break;
    }
    return MilpStatus::Infeasible;
}

}  // namespace reachkit
