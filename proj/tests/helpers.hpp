#pragma once

#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "slearn/graph.hpp"
#include "slearn/matrix.hpp"
#include "slearn/rng.hpp"

namespace testutil {

inline slearn::Matrix matrix_from(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = rows.begin()->size();
    slearn::Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

// Random connected graph: a random attachment tree plus a few extra edges.
inline slearn::Graph random_connected_graph(std::size_t nodes, slearn::RandomStream& rng) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t v = 1; v < nodes; ++v) {
        const std::size_t parent = rng.next_u64() % v;
        edges.push_back({parent, v});
    }
    if (nodes > 2) {
        const std::size_t extra = rng.next_u64() % nodes;
        for (std::size_t e = 0; e < extra; ++e) {
            const std::size_t a = rng.next_u64() % nodes;
            const std::size_t b = rng.next_u64() % nodes;
            if (a == b) continue;
            bool dup = false;
            for (auto [x, y] : edges)
                if ((x == std::min(a, b) && y == std::max(a, b)) ||
                    (y == std::min(a, b) && x == std::max(a, b)))
                    dup = true;
            if (!dup) edges.push_back({std::min(a, b), std::max(a, b)});
        }
    }
    return slearn::Graph::from_edges(nodes, edges);
}

}  // namespace testutil
