#include "cdn/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>

#include "cdn/rand_util.hpp"

namespace cdn::placement {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double subset_diameter(const DistanceMatrix& d, const std::vector<NodeId>& members) {
    double diam = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j)
            diam = std::max(diam, d(members[i], members[j]));
    return diam;
}

// Real member that minimizes the maximum distance to the other members
// (the partition's 1-center); ties by ascending id.
NodeId materialize_center(const DistanceMatrix& d, const std::vector<NodeId>& members) {
    NodeId best = members.front();
    double best_ecc = kInf;
    for (NodeId c : members) {
        double ecc = 0.0;
        for (NodeId v : members) ecc = std::max(ecc, d(c, v));
        if (ecc < best_ecc) {
            best_ecc = ecc;
            best = c;
        }
    }
    return best;
}

}  // namespace

PlacementProblem PlacementProblem::uniform(DistanceMatrix d) {
    PlacementProblem p;
    const std::size_t n = d.size();
    p.distances = std::move(d);
    p.demands.assign(n, 1.0);
    p.candidate_sites.resize(n);
    std::iota(p.candidate_sites.begin(), p.candidate_sites.end(), 0);
    return p;
}

double total_cost(const PlacementProblem& p, const std::vector<NodeId>& centers) {
    double sum = 0.0;
    for (NodeId j = 0; j < p.distances.size(); ++j) {
        double best = kInf;
        for (NodeId c : centers) best = std::min(best, p.distances(j, c));
        sum += p.demands[j] * best;
    }
    return sum;
}

double max_radius(const DistanceMatrix& d, const std::vector<NodeId>& centers) {
    double worst = 0.0;
    for (NodeId j = 0; j < d.size(); ++j) {
        double best = kInf;
        for (NodeId c : centers) best = std::min(best, d(j, c));
        worst = std::max(worst, best);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// k-HST

PartitionTree build_khst(const DistanceMatrix& d, double k, std::uint64_t seed) {
    if (!(k >= 1.0))
        throw Error(Errc::invalid_argument, "k must be >= 1");
    PartitionTree tree;
    tree.k_factor = k;
    tree.seed = seed;
    std::mt19937_64 rng(seed);

    std::vector<NodeId> all(d.size());
    std::iota(all.begin(), all.end(), 0);
    tree.nodes.push_back(PartitionNode{all, subset_diameter(d, all), all.front(), -1, {}});

    // Iterative DFS; each partition with two or more members is carved into
    // children by random balls around randomly chosen anchors.
    std::vector<int> work{0};
    while (!work.empty()) {
        int idx = work.back();
        work.pop_back();
        std::vector<NodeId> remaining = tree.nodes[idx].members;
        const double diam = tree.nodes[idx].diameter;
        if (remaining.size() < 2) continue;

        if (diam == 0.0) {
            // nodes at mutual distance zero cannot be separated by a ball;
            // split straight into singleton leaves
            for (NodeId v : remaining) {
                tree.nodes.push_back(PartitionNode{{v}, 0.0, v, idx, {}});
                tree.nodes[idx].children.push_back(int(tree.nodes.size()) - 1);
            }
            continue;
        }

        while (!remaining.empty()) {
            NodeId anchor = remaining[uniform_index(rng, remaining.size())];
            double radius = uniform_real(rng, diam / (4.0 * k), diam / (2.0 * k));
            std::vector<NodeId> child, rest;
            for (NodeId v : remaining)
                (d(anchor, v) <= radius ? child : rest).push_back(v);
            remaining = std::move(rest);
            PartitionNode node;
            node.members = std::move(child);
            node.diameter = subset_diameter(d, node.members);
            node.anchor = anchor;
            node.parent = idx;
            tree.nodes.push_back(std::move(node));
            int child_idx = int(tree.nodes.size()) - 1;
            tree.nodes[idx].children.push_back(child_idx);
            if (tree.nodes[child_idx].members.size() > 1) work.push_back(child_idx);
        }
    }
    return tree;
}

PartitionTree build_khst(const WeightedGraph& g, double k, std::uint64_t seed) {
    return build_khst(all_pairs_distances(g), k, seed);
}

void PartitionTree::check_invariants(const DistanceMatrix& d) const {
    auto fail = [](const std::string& what) {
        throw Error(Errc::invalid_argument, "partition tree invariant violated: " + what);
    };
    if (nodes.empty()) fail("empty tree");
    if (root().members.size() != d.size()) fail("root must cover all nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const PartitionNode& n = nodes[i];
        if (n.members.empty()) fail("empty partition");
        if (!std::is_sorted(n.members.begin(), n.members.end())) fail("unsorted members");
        if (std::abs(n.diameter - subset_diameter(d, n.members)) > 1e-9)
            fail("recorded diameter mismatch");
        if ((n.members.size() == 1) != (n.diameter == 0.0) && n.members.size() > 1 &&
            n.diameter == 0.0) {
            // multi-member zero-diameter partitions are allowed only as
            // internal nodes that split into singletons
            if (n.children.size() != n.members.size()) fail("zero-diameter split");
        }
        if (n.members.size() == 1 && !n.children.empty()) fail("leaf with children");
        if (n.members.size() > 1 && n.children.empty()) fail("unsplit internal partition");
        if (std::find(n.members.begin(), n.members.end(), n.anchor) == n.members.end())
            fail("anchor outside partition");
        // children partition the parent
        std::vector<NodeId> merged;
        for (int c : n.children) {
            const PartitionNode& ch = nodes[c];
            if (ch.parent != int(i)) fail("bad parent link");
            merged.insert(merged.end(), ch.members.begin(), ch.members.end());
            if (k_factor > 1.0 && ch.diameter > n.diameter / k_factor + 1e-12)
                fail("child diameter above parent/k");
            if (ch.diameter >= n.diameter && n.diameter > 0.0) fail("child did not shrink");
        }
        if (!n.children.empty()) {
            std::sort(merged.begin(), merged.end());
            if (merged != n.members) fail("children do not partition parent");
        }
    }
}

namespace {

struct HeapEntry {
    double diameter;
    bool leaf;
    std::size_t seq;  // creation order, breaks diameter ties deterministically
    int index;

    bool operator<(const HeapEntry& other) const {
        // max-heap: larger diameter first, then splittable before leaves,
        // then earlier creation
        if (diameter != other.diameter) return diameter < other.diameter;
        if (leaf != other.leaf) return leaf;
        return seq > other.seq;
    }
};

PlacementResult collect_partitions(const PartitionTree& tree, const DistanceMatrix& d,
                                   std::vector<int> surviving, const std::string& algo) {
    PlacementResult r;
    r.algorithm = algo;
    double objective = 0.0;
    for (int idx : surviving) {
        objective = std::max(objective, tree.nodes[idx].diameter);
        r.centers.push_back(materialize_center(d, tree.nodes[idx].members));
    }
    std::sort(r.centers.begin(), r.centers.end());
    r.centers.erase(std::unique(r.centers.begin(), r.centers.end()), r.centers.end());
    r.objective = objective;
    r.parameters["count"] = double(surviving.size());
    r.parameters["k_factor"] = tree.k_factor;
    r.parameters["seed"] = double(tree.seed);
    return r;
}

}  // namespace

PlacementResult khst_centers_by_diameter(const PartitionTree& tree, const DistanceMatrix& d,
                                         double D) {
    if (D < 0.0)
        throw Error(Errc::invalid_argument, "D must be >= 0");
    std::priority_queue<HeapEntry> heap;
    std::size_t seq = 0;
    heap.push({tree.root().diameter, tree.root().is_leaf(), seq++, 0});
    std::vector<int> surviving;
    while (!heap.empty()) {
        HeapEntry top = heap.top();
        if (top.diameter <= D) break;  // the head has the largest diameter
        heap.pop();
        for (int c : tree.nodes[top.index].children)
            heap.push({tree.nodes[c].diameter, tree.nodes[c].is_leaf(), seq++, c});
    }
    while (!heap.empty()) {
        surviving.push_back(heap.top().index);
        heap.pop();
    }
    PlacementResult r = collect_partitions(tree, d, surviving, "khst-diameter");
    r.parameters["D"] = D;
    return r;
}

PlacementResult khst_centers_by_budget(const PartitionTree& tree, const DistanceMatrix& d,
                                       std::size_t K) {
    const std::size_t n = tree.root().members.size();
    if (K < 1 || K > n)
        throw Error(Errc::invalid_argument, "K must be in [1, N]");
    std::priority_queue<HeapEntry> heap;
    std::size_t seq = 0;
    std::size_t list_size = 1;
    heap.push({tree.root().diameter, tree.root().is_leaf(), seq++, 0});
    // grow the partition list by splitting the largest splittable partition;
    // the final split may overshoot K and is kept
    while (list_size < K) {
        HeapEntry top = heap.top();
        if (top.leaf) break;  // only leaves left: list_size == n >= K
        heap.pop();
        const auto& children = tree.nodes[top.index].children;
        for (int c : children)
            heap.push({tree.nodes[c].diameter, tree.nodes[c].is_leaf(), seq++, c});
        list_size += children.size() - 1;
    }
    std::vector<int> surviving;
    while (!heap.empty()) {
        surviving.push_back(heap.top().index);
        heap.pop();
    }
    PlacementResult r = collect_partitions(tree, d, surviving, "khst-budget");
    r.parameters["K"] = double(K);
    return r;
}

// ---------------------------------------------------------------------------
// minimum K-center 2-approximation

namespace {

struct MetricEdge {
    double cost;
    NodeId u, v;
};

std::vector<MetricEdge> metric_edges(const DistanceMatrix& d) {
    std::vector<MetricEdge> edges;
    edges.reserve(d.size() * (d.size() - 1) / 2);
    for (NodeId u = 0; u < d.size(); ++u)
        for (NodeId v = u + 1; v < d.size(); ++v) edges.push_back({d(u, v), u, v});
    std::sort(edges.begin(), edges.end(), [](const MetricEdge& a, const MetricEdge& b) {
        return std::tie(a.cost, a.u, a.v) < std::tie(b.cost, b.u, b.v);
    });
    return edges;
}

// Bit-row adjacency, one row per node.
class BitGraph {
public:
    explicit BitGraph(std::size_t n) : n_(n), words_((n + 63) / 64), rows_(n * words_, 0) {}

    void add_edge(NodeId u, NodeId v) {
        set(u, v);
        set(v, u);
    }

    // Greedy maximal independent set of the square graph (2-hop
    // reachability), visiting nodes in ascending id order.
    std::vector<NodeId> square_mis() const {
        std::vector<std::uint64_t> covered(words_, 0);
        std::vector<NodeId> mis;
        std::vector<std::uint64_t> reach(words_);
        for (NodeId u = 0; u < n_; ++u) {
            if (covered[u / 64] >> (u % 64) & 1) continue;
            mis.push_back(u);
            // u, its neighbors, and their neighbors are all covered
            std::copy(row(u), row(u) + words_, reach.begin());
            for (NodeId w = 0; w < n_; ++w)
                if (reach[w / 64] >> (w % 64) & 1)
                    for (std::size_t b = 0; b < words_; ++b) covered[b] |= row(w)[b];
            for (std::size_t b = 0; b < words_; ++b) covered[b] |= reach[b];
            covered[u / 64] |= 1ull << (u % 64);
        }
        return mis;
    }

private:
    const std::uint64_t* row(NodeId u) const { return rows_.data() + u * words_; }
    void set(NodeId u, NodeId v) { rows_[u * words_ + v / 64] |= 1ull << (v % 64); }

    std::size_t n_, words_;
    std::vector<std::uint64_t> rows_;
};

PlacementResult mis_result(const DistanceMatrix& d, std::vector<NodeId> centers,
                           const std::string& algo) {
    PlacementResult r;
    r.centers = std::move(centers);
    r.objective = max_radius(d, r.centers);
    r.algorithm = algo;
    return r;
}

}  // namespace

PlacementResult min_kcenter_2approx(const DistanceMatrix& d, std::size_t K) {
    const std::size_t n = d.size();
    if (K < 1 || K > n)
        throw Error(Errc::invalid_argument, "K must be in [1, N]");
    auto edges = metric_edges(d);
    BitGraph g(n);
    // i = 0 is the empty prefix: its square graph has no edges and the
    // independent set is every node, which answers K = N immediately
    for (std::size_t i = 0; i <= edges.size(); ++i) {
        if (i > 0) g.add_edge(edges[i - 1].u, edges[i - 1].v);
        std::vector<NodeId> mis = g.square_mis();
        if (mis.size() <= K) {
            PlacementResult r = mis_result(d, std::move(mis), "kcenter-2approx");
            r.parameters["K"] = double(K);
            r.parameters["prefix_edges"] = double(i);
            return r;
        }
    }
    throw Error(Errc::invalid_argument, "no qualifying prefix");  // unreachable
}

PlacementResult min_kcenter_2approx(const WeightedGraph& g, std::size_t K) {
    return min_kcenter_2approx(all_pairs_distances(g), K);
}

PlacementResult min_kcenter_count_for_diameter(const DistanceMatrix& d, double D) {
    if (D < 0.0)
        throw Error(Errc::invalid_argument, "D must be >= 0");
    auto edges = metric_edges(d);
    BitGraph g(d.size());
    std::size_t prefix = 0;
    while (prefix < edges.size() && edges[prefix].cost <= D / 2.0) {
        g.add_edge(edges[prefix].u, edges[prefix].v);
        ++prefix;
    }
    PlacementResult r = mis_result(d, g.square_mis(), "kcenter-diameter");
    r.parameters["D"] = D;
    r.parameters["prefix_edges"] = double(prefix);
    r.parameters["count"] = double(r.centers.size());
    return r;
}

// ---------------------------------------------------------------------------
// greedy family

namespace {

void validate_problem(const PlacementProblem& p, std::size_t M) {
    if (p.demands.size() != p.distances.size())
        throw Error(Errc::invalid_argument, "demand vector size mismatch");
    for (double w : p.demands)
        if (w < 0.0) throw Error(Errc::invalid_argument, "demands must be >= 0");
    if (p.candidate_sites.empty())
        throw Error(Errc::invalid_argument, "no candidate sites");
    if (M < 1 || M > p.candidate_sites.size())
        throw Error(Errc::invalid_argument, "M must be in [1, |candidates|]");
}

// Enumerate size-k index subsets of [0, n) in lexicographic order.
template <typename Fn>
void for_each_combination(std::size_t n, std::size_t k, Fn&& fn) {
    if (k > n) return;
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        fn(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

// One run with exactly-`ell` removal moves. ell = 0 is plain greedy.
PlacementResult greedy_core(const PlacementProblem& p, std::size_t M, std::size_t ell) {
    std::vector<NodeId> placed;
    while (placed.size() < M) {
        double best_cost = kInf;
        std::vector<NodeId> best_set;

        // plain move: add the single cheapest site
        for (NodeId c : p.candidate_sites) {
            if (std::find(placed.begin(), placed.end(), c) != placed.end()) continue;
            std::vector<NodeId> trial = placed;
            trial.push_back(c);
            double cost = total_cost(p, trial);
            if (cost < best_cost) {
                best_cost = cost;
                best_set = std::move(trial);
            }
        }

        // backtracking move: drop exactly ell placed servers, add ell+1
        if (ell >= 1 && placed.size() >= ell) {
            std::vector<NodeId> sorted_placed = placed;
            std::sort(sorted_placed.begin(), sorted_placed.end());
            for_each_combination(sorted_placed.size(), ell, [&](const std::vector<std::size_t>& rm) {
                std::vector<NodeId> kept;
                for (std::size_t i = 0, r = 0; i < sorted_placed.size(); ++i) {
                    if (r < rm.size() && rm[r] == i) {
                        ++r;
                        continue;
                    }
                    kept.push_back(sorted_placed[i]);
                }
                std::vector<NodeId> free_sites;
                for (NodeId c : p.candidate_sites)
                    if (std::find(kept.begin(), kept.end(), c) == kept.end())
                        free_sites.push_back(c);
                for_each_combination(free_sites.size(), ell + 1,
                                     [&](const std::vector<std::size_t>& add) {
                                         std::vector<NodeId> trial = kept;
                                         for (std::size_t a : add)
                                             trial.push_back(free_sites[a]);
                                         double cost = total_cost(p, trial);
                                         if (cost < best_cost) {
                                             best_cost = cost;
                                             best_set = trial;
                                         }
                                     });
            });
        }
        placed = std::move(best_set);
    }
    std::sort(placed.begin(), placed.end());
    PlacementResult r;
    r.centers = std::move(placed);
    r.objective = total_cost(p, r.centers);
    return r;
}

}  // namespace

PlacementResult greedy_placement(const PlacementProblem& p, std::size_t M) {
    validate_problem(p, M);
    PlacementResult r = greedy_core(p, M, 0);
    r.algorithm = "greedy";
    r.parameters["M"] = double(M);
    return r;
}

PlacementResult backtracking_greedy(const PlacementProblem& p, std::size_t M, std::size_t ell) {
    validate_problem(p, M);
    // deeper backtracking explores a superset of moves but follows a different
    // trajectory; taking the best over depths 0..ell keeps the objective
    // non-increasing in ell
    PlacementResult best = greedy_core(p, M, 0);
    for (std::size_t l = 1; l <= ell && l < M; ++l) {
        PlacementResult r = greedy_core(p, M, l);
        if (r.objective < best.objective) best = std::move(r);
    }
    best.algorithm = "backtracking-greedy";
    best.parameters["M"] = double(M);
    best.parameters["ell"] = double(ell);
    return best;
}

PlacementResult transit_node_placement(const WeightedGraph& g, std::size_t M) {
    if (M < 1 || M > g.node_count())
        throw Error(Errc::invalid_argument, "M must be in [1, N]");
    auto degrees = outdegrees(g);
    PlacementResult r;
    for (std::size_t i = 0; i < M; ++i) r.centers.push_back(degrees[i].first);
    std::sort(r.centers.begin(), r.centers.end());
    PlacementProblem p = PlacementProblem::uniform(all_pairs_distances(g));
    r.objective = total_cost(p, r.centers);
    r.algorithm = "transit-node";
    r.parameters["M"] = double(M);
    return r;
}

PlacementResult brute_force_optimal(const PlacementProblem& p, std::size_t M,
                                    Objective objective, std::uint64_t enumeration_cap) {
    validate_problem(p, M);
    const std::size_t n = p.candidate_sites.size();
    double combos = 1.0;
    for (std::size_t i = 0; i < M; ++i) combos = combos * double(n - i) / double(i + 1);
    if (combos > double(enumeration_cap))
        throw Error(Errc::enumeration_cap_exceeded, "C(candidates, M) above enumeration cap");

    double best_cost = kInf;
    std::vector<NodeId> best_set;
    for_each_combination(n, M, [&](const std::vector<std::size_t>& idx) {
        std::vector<NodeId> trial;
        trial.reserve(M);
        for (std::size_t i : idx) trial.push_back(p.candidate_sites[i]);
        double cost = objective == Objective::total_cost ? total_cost(p, trial)
                                                         : max_radius(p.distances, trial);
        // lexicographic enumeration + strict improvement = deterministic
        // lexicographically-smallest optimum
        if (cost < best_cost) {
            best_cost = cost;
            best_set = std::move(trial);
        }
    });
    PlacementResult r;
    r.centers = std::move(best_set);
    r.objective = best_cost;
    r.algorithm = objective == Objective::total_cost ? "optimal-total-cost"
                                                     : "optimal-max-radius";
    r.parameters["M"] = double(M);
    return r;
}

}  // namespace cdn::placement
