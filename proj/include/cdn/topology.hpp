#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cdn/errors.hpp"

namespace cdn {

using NodeId = std::uint32_t;

struct Edge {
    NodeId u = 0;
    NodeId v = 0;  // always u < v
    double length = 0.0;

    bool operator==(const Edge&) const = default;
};

// Undirected weighted graph over dense node ids 0..N-1. Immutable once built
// (add_edge/set_label are construction-phase only); all algorithms take it by
// const reference and never mutate.
class WeightedGraph {
public:
    explicit WeightedGraph(std::size_t node_count);

    std::size_t node_count() const { return labels_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }

    // Throws Error on self-loop, duplicate, negative length or id >= N.
    void add_edge(NodeId u, NodeId v, double length);
    bool has_edge(NodeId u, NodeId v) const;

    void set_label(NodeId n, const std::string& label);
    const std::string& label(NodeId n) const;

    const std::vector<std::pair<NodeId, double>>& neighbors(NodeId n) const;
    std::size_t degree(NodeId n) const { return adj_[n].size(); }
    bool connected() const;

    bool operator==(const WeightedGraph& other) const {
        return labels_ == other.labels_ && edges_ == other.edges_;
    }

private:
    std::vector<Edge> edges_;  // sorted by (u, v)
    std::vector<std::string> labels_;
    std::vector<std::vector<std::pair<NodeId, double>>> adj_;
};

// Exact all-pairs shortest-path lengths of a connected graph.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n, double fill = 0.0);

    std::size_t size() const { return n_; }
    double operator()(NodeId u, NodeId v) const { return d_[u * n_ + v]; }
    double& at(NodeId u, NodeId v) { return d_[u * n_ + v]; }

    // Largest entry, i.e. the graph diameter.
    double max_distance() const;

    bool operator==(const DistanceMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<double> d_;
};

// Edge-list text format: first line N, then "u v length" per edge with
// 0 <= u < v < N. Lines starting with '#' are comments; "#label <id> <text>"
// comments carry optional node labels and round-trip through serialize_graph.
WeightedGraph load_graph(const std::string& text);
WeightedGraph load_graph_file(const std::string& path);
std::string serialize_graph(const WeightedGraph& g);

// Dijkstra from every source. Throws Errc::disconnected_graph.
DistanceMatrix all_pairs_distances(const WeightedGraph& g);

// Erdos-Renyi style graph with unit edge lengths, deterministic per seed.
// If the draw is disconnected, unit edges chaining the component
// representatives (smallest member id, ascending) are added, so the result
// is always connected.
WeightedGraph random_graph(std::size_t n, double edge_probability, std::uint64_t seed);

// (node, degree) pairs sorted by descending degree, ties by ascending id.
std::vector<std::pair<NodeId, std::size_t>> outdegrees(const WeightedGraph& g);

}  // namespace cdn
