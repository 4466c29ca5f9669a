#include "cdn/topology.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "cdn/rand_util.hpp"

namespace cdn {

WeightedGraph::WeightedGraph(std::size_t node_count)
    : labels_(node_count), adj_(node_count) {
    if (node_count == 0)
        throw Error(Errc::invalid_argument, "graph needs at least one node");
}

void WeightedGraph::add_edge(NodeId u, NodeId v, double length) {
    if (u >= node_count() || v >= node_count())
        throw Error(Errc::id_out_of_range, "edge endpoint out of range");
    if (u == v)
        throw Error(Errc::malformed_line, "self-loops are not allowed");
    if (u > v) std::swap(u, v);
    if (!(length >= 0.0))
        throw Error(Errc::negative_length, "edge length must be >= 0");
    Edge e{u, v, length};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e,
                               [](const Edge& a, const Edge& b) {
                                   return std::pair{a.u, a.v} < std::pair{b.u, b.v};
                               });
    if (it != edges_.end() && it->u == u && it->v == v)
        throw Error(Errc::duplicate_edge, "duplicate edge");
    edges_.insert(it, e);
    adj_[u].emplace_back(v, length);
    adj_[v].emplace_back(u, length);
}

bool WeightedGraph::has_edge(NodeId u, NodeId v) const {
    if (u > v) std::swap(u, v);
    Edge e{u, v, 0.0};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e,
                               [](const Edge& a, const Edge& b) {
                                   return std::pair{a.u, a.v} < std::pair{b.u, b.v};
                               });
    return it != edges_.end() && it->u == u && it->v == v;
}

void WeightedGraph::set_label(NodeId n, const std::string& label) {
    if (n >= node_count())
        throw Error(Errc::id_out_of_range, "label id out of range");
    labels_[n] = label;
}

const std::string& WeightedGraph::label(NodeId n) const {
    return labels_.at(n);
}

const std::vector<std::pair<NodeId, double>>& WeightedGraph::neighbors(NodeId n) const {
    return adj_.at(n);
}

bool WeightedGraph::connected() const {
    std::vector<char> seen(node_count(), 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        for (auto [v, w] : adj_[u]) {
            (void)w;
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count == node_count();
}

DistanceMatrix::DistanceMatrix(std::size_t n, double fill) : n_(n), d_(n * n, fill) {}

double DistanceMatrix::max_distance() const {
    double m = 0.0;
    for (double x : d_) m = std::max(m, x);
    return m;
}

namespace {

bool parse_u32(const std::string& tok, NodeId* out) {
    if (tok.empty()) return false;
    for (char c : tok)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    errno = 0;
    char* end = nullptr;
    unsigned long v = std::strtoul(tok.c_str(), &end, 10);
    if (errno != 0 || *end != '\0' || v > std::numeric_limits<NodeId>::max()) return false;
    *out = static_cast<NodeId>(v);
    return true;
}

bool parse_double(const std::string& tok, double* out) {
    if (tok.empty()) return false;
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(tok.c_str(), &end);
    if (errno != 0 || end != tok.c_str() + tok.size() || !std::isfinite(v)) return false;
    *out = v;
    return true;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char trial[64];
        std::snprintf(trial, sizeof trial, "%.*g", prec, v);
        if (std::strtod(trial, nullptr) == v) return trial;
    }
    return buf;
}

}  // namespace

WeightedGraph load_graph(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    long node_count = -1;
    std::vector<std::tuple<int, NodeId, NodeId, double>> staged_edges;
    std::vector<std::pair<NodeId, std::string>> staged_labels;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '#') {
            // "#label <id> <text>" comments carry node labels
            auto toks = split_ws(line.substr(first));
            if (toks.size() >= 3 && toks[0] == "#label") {
                NodeId id;
                if (!parse_u32(toks[1], &id))
                    throw Error(Errc::malformed_line, "bad #label id", lineno);
                std::size_t pos = line.find(toks[1], first) + toks[1].size();
                pos = line.find_first_not_of(" \t", pos);
                staged_labels.emplace_back(id, line.substr(pos));
            }
            continue;
        }
        auto toks = split_ws(line);
        if (node_count < 0) {
            NodeId n;
            if (toks.size() != 1 || !parse_u32(toks[0], &n) || n == 0)
                throw Error(Errc::malformed_line, "expected node count", lineno);
            node_count = n;
            continue;
        }
        if (toks.size() != 3)
            throw Error(Errc::malformed_line, "expected 'u v length'", lineno);
        NodeId u, v;
        if (!parse_u32(toks[0], &u) || !parse_u32(toks[1], &v))
            throw Error(Errc::malformed_line, "bad node id", lineno);
        double len;
        if (!parse_double(toks[2], &len))
            throw Error(Errc::malformed_line, "bad edge length", lineno);
        if (len < 0.0)
            throw Error(Errc::negative_length, "negative edge length", lineno);
        if (u >= static_cast<NodeId>(node_count) || v >= static_cast<NodeId>(node_count))
            throw Error(Errc::id_out_of_range, "node id out of range", lineno);
        if (u >= v)
            throw Error(Errc::malformed_line, "edge must satisfy u < v", lineno);
        staged_edges.emplace_back(lineno, u, v, len);
    }
    if (node_count < 0)
        throw Error(Errc::malformed_line, "missing node count", lineno);

    WeightedGraph g(static_cast<std::size_t>(node_count));
    for (auto& [ln, u, v, len] : staged_edges) {
        if (g.has_edge(u, v))
            throw Error(Errc::duplicate_edge, "duplicate edge", ln);
        g.add_edge(u, v, len);
    }
    for (auto& [id, label] : staged_labels) {
        if (id >= g.node_count())
            throw Error(Errc::id_out_of_range, "label id out of range");
        g.set_label(id, label);
    }
    return g;
}

WeightedGraph load_graph_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::invalid_argument, "cannot open graph file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_graph(ss.str());
}

std::string serialize_graph(const WeightedGraph& g) {
    std::ostringstream out;
    out << g.node_count() << "\n";
    for (const Edge& e : g.edges())
        out << e.u << " " << e.v << " " << fmt_double(e.length) << "\n";
    for (NodeId i = 0; i < g.node_count(); ++i)
        if (!g.label(i).empty()) out << "#label " << i << " " << g.label(i) << "\n";
    return out.str();
}

DistanceMatrix all_pairs_distances(const WeightedGraph& g) {
    const std::size_t n = g.node_count();
    const double inf = std::numeric_limits<double>::infinity();
    DistanceMatrix m(n, inf);
    using Item = std::pair<double, NodeId>;
    for (NodeId src = 0; src < n; ++src) {
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        m.at(src, src) = 0.0;
        pq.emplace(0.0, src);
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > m(src, u)) continue;
            for (auto [v, w] : g.neighbors(u)) {
                double nd = d + w;
                if (nd < m(src, v)) {
                    m.at(src, v) = nd;
                    pq.emplace(nd, v);
                }
            }
        }
        for (NodeId v = 0; v < n; ++v)
            if (m(src, v) == inf)
                throw Error(Errc::disconnected_graph, "graph is disconnected");
    }
    return m;
}

WeightedGraph random_graph(std::size_t n, double edge_probability, std::uint64_t seed) {
    if (n == 0)
        throw Error(Errc::invalid_argument, "n must be >= 1");
    if (edge_probability < 0.0 || edge_probability > 1.0)
        throw Error(Errc::invalid_argument, "edge probability must be in [0,1]");
    WeightedGraph g(n);
    std::mt19937_64 rng(seed);
    for (NodeId u = 0; u + 1 < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (canonical_double(rng) < edge_probability) g.add_edge(u, v, 1.0);

    // connect leftover components with unit edges, chained over the
    // per-component smallest ids in ascending order
    std::vector<NodeId> comp(n);
    std::iota(comp.begin(), comp.end(), 0);
    // union-find with path compression
    auto find = [&](NodeId x) {
        while (comp[x] != x) {
            comp[x] = comp[comp[x]];
            x = comp[x];
        }
        return x;
    };
    auto unite = [&](NodeId a, NodeId b) {
        a = find(a);
        b = find(b);
        if (a != b) comp[std::max(a, b)] = std::min(a, b);
    };
    for (const Edge& e : g.edges()) unite(e.u, e.v);
    std::vector<NodeId> reps;
    for (NodeId i = 0; i < n; ++i)
        if (find(i) == i) reps.push_back(i);
    for (std::size_t i = 0; i + 1 < reps.size(); ++i) {
        g.add_edge(reps[i], reps[i + 1], 1.0);
        unite(reps[i], reps[i + 1]);
    }
    return g;
}

std::vector<std::pair<NodeId, std::size_t>> outdegrees(const WeightedGraph& g) {
    std::vector<std::pair<NodeId, std::size_t>> out;
    out.reserve(g.node_count());
    for (NodeId i = 0; i < g.node_count(); ++i) out.emplace_back(i, g.degree(i));
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

}  // namespace cdn
