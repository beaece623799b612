#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smoothfix/common.hpp"
#include "smoothfix/rng.hpp"
#include "smoothfix/weight_model.hpp"

namespace smoothfix {

struct TreeNode {
    std::int32_t parent = -1;       ///< arena index; -1 for the root
    std::int32_t first_child = -1;  ///< arena index of first child, -1 if none
    std::int32_t num_children = 0;
    std::int32_t child_index = 0;   ///< Ulam-Harris index j of the edge into this node
    std::uint16_t depth = 0;
    std::int8_t tau = 1;            ///< sign of L(v)
    double l = 1.0;                 ///< L(v); may underflow to 0 for deep trees
    double s = 0.0;                 ///< -log|L(v)| as a running sum along the path
};

/// Breadth-first arena realization of the weighted branching process.
/// Nodes with T_j = 0 are pruned at creation. Generation n occupies the
/// contiguous index range [gen_begin[n], gen_begin[n+1]).
struct WeightedTree {
    std::vector<TreeNode> nodes;
    std::vector<std::uint32_t> gen_begin;
    std::vector<double> shifts;  ///< per-node C(v), row-major nodes x d; empty when C = 0
    int dimension = 1;
    bool has_shift = false;
    int requested_generation = 0;
    bool truncated = false;  ///< node_cap hit; generations beyond the cap are missing
    bool extinct = false;    ///< the Galton-Watson population died before requested_generation

    int grown_generation() const { return static_cast<int>(gen_begin.size()) - 2; }
    std::size_t generation_size(int n) const { return gen_begin[n + 1] - gen_begin[n]; }

    /// |L(v)|^alpha computed from the linear weight while it is representable,
    /// from the log-magnitude running sum otherwise.
    double abs_l_pow(std::size_t node, double alpha) const {
        const TreeNode& v = nodes[node];
        if (v.l != 0.0) return alpha == 1.0 ? std::fabs(v.l) : std::pow(std::fabs(v.l), alpha);
        return std::exp(-alpha * v.s);
    }

    double signed_l(std::size_t node) const {
        const TreeNode& v = nodes[node];
        if (v.l != 0.0) return v.l;
        return static_cast<double>(v.tau) * std::exp(-v.s);
    }

    const double* shift_of(std::size_t node) const {
        return shifts.data() + node * static_cast<std::size_t>(dimension);
    }

    /// Ulam-Harris address, child indices joined by '.'; the root is "-".
    std::string address(std::size_t node) const;
};

constexpr std::size_t kDefaultNodeCap = std::size_t{1} << 22;

WeightedTree grow(const WeightModel& model, int max_generation, Rng& rng,
                  std::size_t node_cap = kDefaultNodeCap);

struct MartingaleTrace {
    std::vector<double> w;                 ///< W_n = sum |L(v)|^alpha over generation n
    std::vector<double> z;                 ///< Z_n = sum L(v)
    std::vector<Vec> wstar;                ///< W*_n = sum over |v| < n of L(v) C(v)
    std::vector<std::size_t> population;   ///< N_n
    double alpha = 1.0;
    bool partial = false;  ///< tree was truncated before the requested generation
};

MartingaleTrace martingale_trace(const WeightedTree& tree, double alpha);

struct LineMember {
    std::int32_t node = -1;  ///< arena index; -1 for lazily grown lines
    double l = 0.0;
    double s = 0.0;
    std::int8_t tau = 1;
};

/// First-crossing anti-chain over level t: members v have S(v) > t while
/// every proper ancestor w has S(w) <= t.
struct StoppingLine {
    double level = 0.0;
    std::vector<LineMember> members;
    bool complete = true;  ///< false when some ray was cut before crossing
};

StoppingLine stopping_line(const WeightedTree& tree, double t);

/// Grows only the subtree with S <= t (depth-first), so small levels never
/// realize whole generations.
StoppingLine grow_stopping_line(const WeightModel& model, double t, Rng& rng,
                                std::size_t node_cap = kDefaultNodeCap);

/// First strictly increasing ladder line: first nodes with S(v) > 0 along
/// each path. Coincides with the stopping line at level 0; every member has
/// |L(v)| < 1.
StoppingLine ladder_line(const WeightedTree& tree);

/// Ratio of the sign- and cutoff-restricted exp(-beta (S-t)) mass on the
/// line to its unrestricted exp(-alpha (S-t)) mass; cutoff may be infinity.
double sign_ratio(const StoppingLine& line, double alpha, double beta, int target_sign,
                  double cutoff);

/// Line-delimited debug dump: "address L S tau" per node.
std::string dump_tree(const WeightedTree& tree);

}  // namespace smoothfix
