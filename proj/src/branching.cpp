#include "smoothfix/branching.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace smoothfix {

std::string WeightedTree::address(std::size_t node) const {
    if (nodes[node].parent < 0) return "-";
    std::vector<int> path;
    for (std::int32_t v = static_cast<std::int32_t>(node); v >= 0 && nodes[v].parent >= 0;
         v = nodes[v].parent)
        path.push_back(nodes[v].child_index);
    std::ostringstream os;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        if (it != path.rbegin()) os << '.';
        os << *it;
    }
    return os.str();
}

WeightedTree grow(const WeightModel& model, int max_generation, Rng& rng, std::size_t node_cap) {
    if (max_generation < 0) throw SpecError("max_generation must be nonnegative");
    WeightedTree tree;
    tree.dimension = model.dimension();
    tree.has_shift = model.has_shift();
    tree.requested_generation = max_generation;
    tree.nodes.push_back(TreeNode{});
    tree.gen_begin = {0, 1};
    if (tree.has_shift) tree.shifts.resize(static_cast<std::size_t>(tree.dimension), 0.0);

    for (int n = 0; n < max_generation; ++n) {
        const std::uint32_t begin = tree.gen_begin[n];
        const std::uint32_t end = tree.gen_begin[n + 1];
        if (begin == end) {
            tree.extinct = true;
            break;
        }
        const std::size_t before = tree.nodes.size();
        bool capped = false;
        for (std::uint32_t v = begin; v < end && !capped; ++v) {
            const WeightDraw draw = model.sample(rng);
            if (tree.has_shift) {
                double* c = tree.shifts.data() + std::size_t{v} * tree.dimension;
                for (int k = 0; k < tree.dimension; ++k) c[k] = draw.shift[k];
            }
            tree.nodes[v].first_child =
                draw.terms.empty() ? -1 : static_cast<std::int32_t>(tree.nodes.size());
            tree.nodes[v].num_children = static_cast<std::int32_t>(draw.terms.size());
            for (const auto& term : draw.terms) {
                if (tree.nodes.size() >= node_cap) {
                    capped = true;
                    break;
                }
                TreeNode child;
                child.parent = static_cast<std::int32_t>(v);
                child.child_index = term.index;
                child.depth = static_cast<std::uint16_t>(n + 1);
                child.l = tree.nodes[v].l * term.value;
                child.s = tree.nodes[v].s - std::log(std::fabs(term.value));
                child.tau = static_cast<std::int8_t>(term.value > 0.0 ? tree.nodes[v].tau
                                                                      : -tree.nodes[v].tau);
                tree.nodes.push_back(child);
            }
        }
        if (capped) {
            // drop the partially built generation so every stored generation
            // is either complete or absent
            tree.nodes.resize(before);
            for (std::uint32_t v = begin; v < end; ++v) {
                tree.nodes[v].first_child = -1;
                tree.nodes[v].num_children = 0;
            }
            tree.truncated = true;
            break;
        }
        tree.gen_begin.push_back(static_cast<std::uint32_t>(tree.nodes.size()));
        if (tree.has_shift)
            tree.shifts.resize(tree.nodes.size() * static_cast<std::size_t>(tree.dimension), 0.0);
    }
    if (!tree.extinct && tree.grown_generation() >= 0 &&
        tree.generation_size(tree.grown_generation()) == 0)
        tree.extinct = true;
    return tree;
}

MartingaleTrace martingale_trace(const WeightedTree& tree, double alpha) {
    MartingaleTrace trace;
    trace.alpha = alpha;
    trace.partial = tree.truncated;
    const int n_max = tree.grown_generation();
    const std::size_t d = static_cast<std::size_t>(tree.dimension);
    Vec wstar = zeros(d);
    for (int n = 0; n <= n_max; ++n) {
        double w = 0.0, z = 0.0;
        for (std::uint32_t v = tree.gen_begin[n]; v < tree.gen_begin[n + 1]; ++v) {
            w += tree.abs_l_pow(v, alpha);
            z += tree.signed_l(v);
        }
        trace.w.push_back(w);
        trace.z.push_back(z);
        trace.population.push_back(tree.generation_size(n));
        trace.wstar.push_back(wstar);
        if (tree.has_shift) {
            for (std::uint32_t v = tree.gen_begin[n]; v < tree.gen_begin[n + 1]; ++v) {
                const double lv = tree.signed_l(v);
                const double* c = tree.shift_of(v);
                for (std::size_t k = 0; k < d; ++k) wstar[k] += lv * c[k];
            }
        }
    }
    return trace;
}

StoppingLine stopping_line(const WeightedTree& tree, double t) {
    if (t < 0.0) throw SpecError("stopping line level must be nonnegative");
    StoppingLine line;
    line.level = t;
    const int last_gen = tree.grown_generation();
    std::vector<std::int32_t> stack = {0};
    while (!stack.empty()) {
        const std::int32_t v = stack.back();
        stack.pop_back();
        const TreeNode& node = tree.nodes[v];
        if (node.s > t) {
            line.members.push_back({v, tree.signed_l(v), node.s, node.tau});
            continue;
        }
        if (node.num_children == 0) {
            // a ray below the level with no stored children: genuinely dead
            // only if the node was expanded; frontier nodes were not
            if (static_cast<int>(node.depth) >= last_gen) line.complete = false;
            continue;
        }
        for (std::int32_t c = node.num_children - 1; c >= 0; --c)
            stack.push_back(node.first_child + c);
    }
    return line;
}

StoppingLine grow_stopping_line(const WeightModel& model, double t, Rng& rng,
                                std::size_t node_cap) {
    if (t < 0.0) throw SpecError("stopping line level must be nonnegative");
    StoppingLine line;
    line.level = t;
    struct Frame {
        double l, s;
        std::int8_t tau;
    };
    std::vector<Frame> stack = {{1.0, 0.0, 1}};
    std::size_t visited = 0;
    while (!stack.empty()) {
        if (++visited > node_cap) {
            line.complete = false;
            break;
        }
        const Frame f = stack.back();
        stack.pop_back();
        if (f.s > t) {
            line.members.push_back({-1, f.l, f.s, f.tau});
            continue;
        }
        const WeightDraw draw = model.sample(rng);
        for (auto it = draw.terms.rbegin(); it != draw.terms.rend(); ++it) {
            Frame child;
            child.l = f.l * it->value;
            child.s = f.s - std::log(std::fabs(it->value));
            child.tau = static_cast<std::int8_t>(it->value > 0.0 ? f.tau : -f.tau);
            stack.push_back(child);
        }
    }
    return line;
}

StoppingLine ladder_line(const WeightedTree& tree) { return stopping_line(tree, 0.0); }

double sign_ratio(const StoppingLine& line, double alpha, double beta, int target_sign,
                  double cutoff) {
    if (!line.complete)
        throw EstimationError("sign_ratio requires a complete stopping line");
    double num = 0.0, den = 0.0;
    for (const auto& m : line.members) {
        const double excess = m.s - line.level;
        den += std::exp(-alpha * excess);
        if (m.tau == target_sign && excess <= cutoff) num += std::exp(-beta * excess);
    }
    if (line.members.empty() || den == 0.0)
        throw EstimationError("undefined sign ratio: empty stopping line");
    return num / den;
}

std::string dump_tree(const WeightedTree& tree) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
        os << tree.address(v) << ' ' << tree.signed_l(v) << ' ' << tree.nodes[v].s << ' '
           << static_cast<int>(tree.nodes[v].tau) << '\n';
    }
    return os.str();
}

}  // namespace smoothfix
