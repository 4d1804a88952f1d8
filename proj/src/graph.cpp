#include "cascadelab/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "cascadelab/error.hpp"

namespace cascadelab {

Graph Graph::from_edges(std::size_t node_count, std::span<const Edge> edges, EdgeDefects* defects) {
    if (node_count > std::numeric_limits<NodeId>::max())
        throw ConstructionError("graph too large for 32-bit node ids");

    std::vector<Edge> canon;
    canon.reserve(edges.size());
    EdgeDefects local;
    for (auto [u, v] : edges) {
        if (u >= node_count || v >= node_count)
            throw ConstructionError("edge endpoint out of range");
        if (u == v) {
            ++local.self_loops;
            continue;
        }
        canon.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(canon.begin(), canon.end());
    auto last = std::unique(canon.begin(), canon.end());
    local.duplicates = static_cast<std::size_t>(std::distance(last, canon.end()));
    canon.erase(last, canon.end());
    if (defects) *defects = local;

    Graph g;
    std::vector<std::size_t> deg(node_count, 0);
    for (auto [u, v] : canon) {
        ++deg[u];
        ++deg[v];
    }
    g.offsets_.assign(node_count + 1, 0);
    std::partial_sum(deg.begin(), deg.end(), g.offsets_.begin() + 1);
    g.targets_.resize(2 * canon.size());
    std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    // Smaller neighbors are written first, then larger ones; canon is sorted,
    // so both passes emit each list in ascending order.
    for (auto [u, v] : canon) {
        g.targets_[fill[v]++] = u;
    }
    for (auto [u, v] : canon) {
        g.targets_[fill[u]++] = v;
    }
    for (std::size_t v = 0; v < node_count; ++v) {
        g.degree_index_[deg[v]].push_back(static_cast<NodeId>(v));
    }
    g.original_ids_.resize(node_count);
    std::iota(g.original_ids_.begin(), g.original_ids_.end(), std::uint64_t{0});
    return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

Graph Graph::with_original_ids(std::vector<std::uint64_t> ids) const {
    if (ids.size() != node_count())
        throw ConstructionError("original id table size does not match node count");
    Graph g = *this;
    g.original_ids_ = std::move(ids);
    return g;
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId u = 0; u < node_count(); ++u) {
        for (NodeId v : neighbors(u)) {
            if (u < v) out.emplace_back(u, v);
        }
    }
    return out;
}

namespace {

std::uint64_t parse_id(std::string_view token, std::size_t line) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw ParseError("expected a non-negative integer node id, got '" + std::string(token) + "'", line);
    return value;
}

}  // namespace

EdgeListLoad load_edge_list(std::istream& in) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        std::string_view line(text);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

        std::string_view tokens[2];
        std::size_t count = 0;
        std::size_t pos = 0;
        while (pos < line.size()) {
            while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
            if (pos >= line.size()) break;
            std::size_t end = pos;
            while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
            if (count == 2) throw ParseError("more than two tokens on an edge line", line_no);
            tokens[count++] = line.substr(pos, end - pos);
            pos = end;
        }
        if (count == 0) continue;
        if (count == 1) throw ParseError("edge line needs two node ids", line_no);
        raw.emplace_back(parse_id(tokens[0], line_no), parse_id(tokens[1], line_no));
    }
    if (in.bad()) throw IoError("failed reading edge list");

    std::vector<std::uint64_t> ids;
    ids.reserve(2 * raw.size());
    for (auto [u, v] : raw) {
        ids.push_back(u);
        ids.push_back(v);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    auto dense = [&ids](std::uint64_t id) {
        return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };

    std::vector<Edge> edges;
    edges.reserve(raw.size());
    for (auto [u, v] : raw) edges.emplace_back(dense(u), dense(v));

    EdgeListLoad result;
    result.graph = Graph::from_edges(ids.size(), edges, &result.dropped).with_original_ids(std::move(ids));
    return result;
}

void save_edge_list(const Graph& g, std::ostream& out) {
    auto ids = g.original_ids();
    for (auto [u, v] : g.edges()) {
        out << ids[u] << ' ' << ids[v] << '\n';
    }
    if (!out) throw IoError("failed writing edge list");
}

}  // namespace cascadelab
