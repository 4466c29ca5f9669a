#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cdn/topology.hpp"

namespace cdn::placement {

// One partition of the recursive decomposition. Leaves hold a single node.
struct PartitionNode {
    std::vector<NodeId> members;  // sorted ascending
    double diameter = 0.0;        // max pairwise graph distance among members
    NodeId anchor = 0;            // member whose ball seeded this partition
    int parent = -1;
    std::vector<int> children;    // indices into PartitionTree::nodes

    bool is_leaf() const { return members.size() == 1; }
};

// Tree of partitions: the root covers the whole graph, every child's
// diameter is below its parent's divided by k_factor, and the link from a
// partition's virtual node to each child weighs half the partition diameter.
struct PartitionTree {
    double k_factor = 1.0;
    std::uint64_t seed = 0;
    std::vector<PartitionNode> nodes;  // nodes[0] is the root

    const PartitionNode& root() const { return nodes.front(); }
    // Link length from the virtual node of `parent_index` to any child.
    double link_length(int parent_index) const { return nodes[parent_index].diameter / 2.0; }
    // Throws Error(Errc::invalid_argument) describing the first violated law.
    void check_invariants(const DistanceMatrix& d) const;
};

struct PlacementProblem {
    DistanceMatrix distances;
    std::vector<double> demands;          // per-client weights, size N
    std::vector<NodeId> candidate_sites;  // sorted ascending

    static PlacementProblem uniform(DistanceMatrix d);
};

struct PlacementResult {
    std::vector<NodeId> centers;  // sorted ascending
    double objective = 0.0;
    std::string algorithm;
    std::map<std::string, double> parameters;
};

enum class Objective { total_cost, max_radius };

// Total weighted nearest-center cost / worst nearest-center distance of a
// center set. Shared by the greedy family and the brute-force oracle.
double total_cost(const PlacementProblem& p, const std::vector<NodeId>& centers);
double max_radius(const DistanceMatrix& d, const std::vector<NodeId>& centers);

// Recursive randomized ball carving. Child radii are drawn uniformly from
// [diam/(4k), diam/(2k)) so any two members of a child sit strictly closer
// than diam/k: the shrink law holds and the recursion always terminates.
PartitionTree build_khst(const DistanceMatrix& d, double k, std::uint64_t seed);
PartitionTree build_khst(const WeightedGraph& g, double k, std::uint64_t seed);

// Split the largest partition until all surviving partitions have
// diameter <= D; one center (the partition 1-center) per survivor.
PlacementResult khst_centers_by_diameter(const PartitionTree& tree, const DistanceMatrix& d,
                                         double D);

// Split the largest partition while fewer than K partitions exist. A split
// may overshoot K; the actual count is reported in parameters["count"].
PlacementResult khst_centers_by_budget(const PartitionTree& tree, const DistanceMatrix& d,
                                       std::size_t K);

// 2-approximation of the minimum K-center problem over the metric closure:
// order all node pairs by distance, square each prefix graph (2-hop
// reachability), take the greedy maximal independent set, and return the
// first prefix whose independent set fits the budget.
PlacementResult min_kcenter_2approx(const DistanceMatrix& d, std::size_t K);
PlacementResult min_kcenter_2approx(const WeightedGraph& g, std::size_t K);

// Center count needed so that no node is farther than D from a center:
// largest edge prefix with cost <= D/2, then the same independent-set
// construction. parameters["count"] holds the center count.
PlacementResult min_kcenter_count_for_diameter(const DistanceMatrix& d, double D);

// Pick one site at a time, minimizing total weighted cost with clients
// assigned to their nearest chosen server. Ties go to the lowest site id.
PlacementResult greedy_placement(const PlacementProblem& p, std::size_t M);

// Greedy with backtracking: each iteration also considers removing exactly
// `ell` placed servers and adding ell+1 fresh ones. Returns the best result
// over backtrack depths 0..ell, so the objective never rises with ell and
// ell = 0 reproduces greedy_placement exactly.
PlacementResult backtracking_greedy(const PlacementProblem& p, std::size_t M, std::size_t ell);

// The M nodes of highest degree (ties by ascending id); objective is the
// uniform-demand total nearest-center cost.
PlacementResult transit_node_placement(const WeightedGraph& g, std::size_t M);

// Exhaustive optimum for desk-scale validation.
PlacementResult brute_force_optimal(const PlacementProblem& p, std::size_t M,
                                    Objective objective,
                                    std::uint64_t enumeration_cap = 2'000'000);

}  // namespace cdn::placement
