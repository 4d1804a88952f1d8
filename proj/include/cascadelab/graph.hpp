#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace cascadelab {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

// Counts of input edges discarded while building a simple graph.
struct EdgeDefects {
    std::size_t self_loops = 0;
    std::size_t duplicates = 0;
};

// Immutable undirected simple graph in compressed adjacency form.
//
// Neighbor lists are sorted ascending. Every node id is dense in [0, N). The
// original-id table maps dense ids back to the labels of an ingested edge list
// (identity for generated graphs).
class Graph {
public:
    Graph() = default;

    // Self-loops and repeated edges in `edges` are dropped and counted in `defects`.
    static Graph from_edges(std::size_t node_count, std::span<const Edge> edges,
                            EdgeDefects* defects = nullptr);

    std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t edge_count() const noexcept { return targets_.size() / 2; }

    std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

    std::span<const NodeId> neighbors(NodeId v) const {
        return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
    }

    bool has_edge(NodeId u, NodeId v) const;

    // Degree k -> ids of all nodes of degree k (ascending). Partitions the node set.
    const std::map<std::size_t, std::vector<NodeId>>& degree_index() const noexcept {
        return degree_index_;
    }

    std::size_t max_degree() const noexcept {
        return degree_index_.empty() ? 0 : degree_index_.rbegin()->first;
    }

    std::span<const std::uint64_t> original_ids() const noexcept { return original_ids_; }
    Graph with_original_ids(std::vector<std::uint64_t> ids) const;

    // Canonical edge list: u < v, sorted lexicographically.
    std::vector<Edge> edges() const;

private:
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> targets_;
    std::map<std::size_t, std::vector<NodeId>> degree_index_;
    std::vector<std::uint64_t> original_ids_;
};

struct EdgeListLoad {
    Graph graph;
    EdgeDefects dropped;
};

// Reads whitespace separated "u v" pairs, one per line. Blank lines and text
// after '#' are ignored. Ids are arbitrary non-negative integers; they are
// remapped to dense ids in ascending order of the original label.
EdgeListLoad load_edge_list(std::istream& in);

// Writes the canonical form "u v\n" (u < v, ascending) using original ids.
void save_edge_list(const Graph& g, std::ostream& out);

}  // namespace cascadelab
