#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace slearn {

// Undirected simple graph. Nodes are 0-based internally; config files and the
// CLI speak 1-based ids.
struct Graph {
    std::size_t node_count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // i < j, unique

    static Graph from_edges(std::size_t nodes,
                            const std::vector<std::pair<std::size_t, std::size_t>>& raw) {
        if (nodes == 0) throw std::invalid_argument("graph: node count must be positive");
        Graph g;
        g.node_count = nodes;
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (auto [a, b] : raw) {
            if (a >= nodes || b >= nodes) throw std::invalid_argument("graph: edge endpoint out of range");
            if (a == b) throw std::invalid_argument("graph: self-loops not allowed");
            if (a > b) std::swap(a, b);
            if (!seen.insert({a, b}).second) throw std::invalid_argument("graph: duplicate edge");
        }
        g.edges.assign(seen.begin(), seen.end());
        return g;
    }

    static Graph ring(std::size_t nodes) {
        std::vector<std::pair<std::size_t, std::size_t>> e;
        if (nodes == 2) {
            e.push_back({0, 1});
        } else {
            for (std::size_t i = 0; i < nodes; ++i) e.push_back({i, (i + 1) % nodes});
        }
        return from_edges(nodes, e);
    }

    std::vector<std::size_t> degrees() const {
        std::vector<std::size_t> deg(node_count, 0);
        for (auto [a, b] : edges) {
            ++deg[a];
            ++deg[b];
        }
        return deg;
    }

    std::vector<std::vector<std::size_t>> adjacency() const {
        std::vector<std::vector<std::size_t>> adj(node_count);
        for (auto [a, b] : edges) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        return adj;
    }

    bool connected() const {
        if (node_count == 0) return false;
        if (node_count == 1) return true;
        auto adj = adjacency();
        std::vector<bool> seen(node_count, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        std::size_t count = 1;
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (std::size_t w : adj[v]) {
                if (!seen[w]) {
                    seen[w] = true;
                    ++count;
                    stack.push_back(w);
                }
            }
        }
        return count == node_count;
    }
};

namespace presets {

// 10-node benchmark topology: a ring 1-2-...-10-1 plus chords {1,5} and {2,7}
// (1-based labels), 12 edges total.
inline Graph ten_node_benchmark() {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t i = 0; i < 10; ++i) e.push_back({i, (i + 1) % 10});
    e.push_back({0, 4});
    e.push_back({1, 6});
    return Graph::from_edges(10, e);
}

}  // namespace presets

}  // namespace slearn
