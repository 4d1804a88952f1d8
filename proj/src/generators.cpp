#include "cascadelab/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <unordered_map>

#include "cascadelab/error.hpp"

namespace cascadelab {

namespace {

std::uint64_t edge_key(NodeId u, NodeId v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | v;
}

// Removes self-loops and multi-edges by double-edge swaps between edges of
// the same group. Edges of an off-diagonal group are stored oriented (class a
// endpoint first), and the swap (a,b),(c,d) -> (a,d),(c,b) keeps every
// endpoint inside its class; diagonal groups may also use (a,c),(b,d).
void repair_defects(std::vector<Edge>& edges, const std::vector<std::uint32_t>& group,
                    const std::vector<bool>& diagonal, std::mt19937_64& rng, GeneratorReport& report) {
    std::unordered_map<std::uint64_t, std::uint32_t> mult;
    mult.reserve(edges.size() * 2);
    for (auto [u, v] : edges) ++mult[edge_key(u, v)];

    auto is_defect = [&](std::size_t i) {
        auto [u, v] = edges[i];
        return u == v || mult[edge_key(u, v)] > 1;
    };

    std::size_t initial = 0;
    for (auto [u, v] : edges) {
        if (u == v) ++initial;
    }
    for (auto& [key, m] : mult) {
        if ((key >> 32) != (key & 0xffffffffu)) initial += m - 1;
    }
    if (initial == 0) return;

    std::size_t groups = diagonal.size();
    std::vector<std::vector<std::size_t>> members(groups);
    for (std::size_t i = 0; i < edges.size(); ++i) members[group[i]].push_back(i);

    std::vector<std::size_t> defects;
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (is_defect(i)) defects.push_back(i);

    std::size_t budget = 2000 + 500 * initial;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    while (!defects.empty() && budget > 0) {
        std::vector<std::size_t> next;
        for (std::size_t i : defects) {
            if (!is_defect(i)) continue;
            if (budget == 0) {
                next.push_back(i);
                continue;
            }
            --budget;
            const auto& pool = members[group[i]];
            if (pool.size() < 2) {
                next.push_back(i);
                continue;
            }
            std::size_t j = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
            if (j == i) {
                next.push_back(i);
                continue;
            }
            auto [a, b] = edges[i];
            auto [c, d] = edges[j];
            Edge e1{a, d}, e2{c, b};
            if (diagonal[group[i]] && coin(rng) < 0.5) {
                e1 = {a, c};
                e2 = {b, d};
            }
            auto k1 = edge_key(e1.first, e1.second), k2 = edge_key(e2.first, e2.second);
            --mult[edge_key(a, b)];
            --mult[edge_key(c, d)];
            bool ok = e1.first != e1.second && e2.first != e2.second && k1 != k2 && mult[k1] == 0 && mult[k2] == 0;
            if (ok) {
                edges[i] = e1;
                edges[j] = e2;
                ++mult[k1];
                ++mult[k2];
            } else {
                ++mult[edge_key(a, b)];
                ++mult[edge_key(c, d)];
                next.push_back(i);
            }
        }
        defects = std::move(next);
    }

    std::size_t remaining = 0;
    for (auto [u, v] : edges) {
        if (u == v) ++remaining;
    }
    for (auto& [key, m] : mult) {
        if (m > 1 && (key >> 32) != (key & 0xffffffffu)) remaining += m - 1;
    }
    report.defects_repaired += initial - remaining;
    report.defects_erased += remaining;
}

std::mt19937_64 make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t n) {
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw ConfigError("apportion needs positive total weight");
    std::vector<std::size_t> counts(weights.size());
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double exact = weights[i] / total * static_cast<double>(n);
        // Guard against 3333.0000000000005 style rounding of exact shares.
        double fl = std::floor(exact + 1e-9);
        counts[i] = static_cast<std::size_t>(fl);
        assigned += counts[i];
        rema.emplace_back(exact - fl, i);
    }
    std::stable_sort(rema.begin(), rema.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++counts[rema[r % rema.size()].second];
    return counts;
}

Graph generate_config_model(const DegreeDistribution& dist, std::size_t n, std::uint64_t seed,
                            GeneratorReport* report) {
    if (n < 2) throw ConfigError("configuration model needs n >= 2");
    if (dist.kmax() >= n) throw ConstructionError("kmax >= n: no simple graph realizes this degree distribution");
    GeneratorReport local;
    auto rng = make_rng(seed);

    auto probs = dist.probabilities();
    auto counts = apportion(std::vector<double>(probs.begin(), probs.end()), n);
    std::vector<std::size_t> degree;
    degree.reserve(n);
    for (std::size_t k = 0; k < counts.size(); ++k) degree.insert(degree.end(), counts[k], k);
    std::shuffle(degree.begin(), degree.end(), rng);

    std::size_t stub_total = std::accumulate(degree.begin(), degree.end(), std::size_t{0});
    if (stub_total % 2 == 1) {
        // Need both parities in the support for a single resample to fix the sum.
        bool odd = false, even = false;
        for (std::size_t k : dist.support()) (k % 2 ? odd : even) = true;
        if (!(odd && even))
            throw ConstructionError("odd stub total and all supported degrees share a parity");
        std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
        std::uniform_int_distribution<std::size_t> node(0, n - 1);
        for (;;) {
            std::size_t v = node(rng);
            std::size_t k = pick(rng);
            if ((k + degree[v]) % 2 == 1) {
                stub_total = stub_total - degree[v] + k;
                degree[v] = k;
                ++local.parity_adjustments;
                break;
            }
        }
    }

    std::vector<NodeId> stubs;
    stubs.reserve(stub_total);
    for (std::size_t v = 0; v < n; ++v) stubs.insert(stubs.end(), degree[v], static_cast<NodeId>(v));
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::vector<Edge> edges;
    edges.reserve(stub_total / 2);
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) edges.emplace_back(stubs[i], stubs[i + 1]);

    repair_defects(edges, std::vector<std::uint32_t>(edges.size(), 0), {true}, rng, local);
    if (report) *report = local;
    return Graph::from_edges(n, edges);
}

Graph generate_er(double mean_degree, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw ConfigError("Erdos-Renyi graph needs n >= 2");
    if (!(mean_degree > 0.0) || !(mean_degree < static_cast<double>(n - 1)))
        throw ConfigError("Erdos-Renyi mean degree must satisfy 0 < z < n - 1");
    const double p = mean_degree / static_cast<double>(n - 1);
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // Geometric skipping over the lower triangle (Batagelj & Brandes).
    std::vector<Edge> edges;
    const double log_q = std::log1p(-p);
    std::int64_t v = 1, w = -1;
    const auto nn = static_cast<std::int64_t>(n);
    while (v < nn) {
        double r = unif(rng);
        double skip = std::floor(std::log1p(-r) / log_q);
        if (skip > 4.0 * static_cast<double>(nn) * static_cast<double>(nn)) break;
        w += 1 + static_cast<std::int64_t>(skip);
        while (w >= v && v < nn) {
            w -= v;
            ++v;
        }
        if (v < nn) edges.emplace_back(static_cast<NodeId>(w), static_cast<NodeId>(v));
    }
    return Graph::from_edges(n, edges);
}

Graph generate_correlated(const JointDegreeDistribution& joint, std::size_t n, std::uint64_t seed,
                          GeneratorReport* report) {
    if (n < 2) throw ConfigError("correlated generator needs n >= 2");
    const auto degrees = joint.degrees();
    const std::size_t c = degrees.size();
    if (degrees.back() >= n) throw ConstructionError("kmax >= n: no simple graph realizes this joint distribution");
    GeneratorReport local;
    auto rng = make_rng(seed);

    auto implied = joint.implied_degree_distribution();
    std::vector<double> w(c);
    for (std::size_t i = 0; i < c; ++i) w[i] = implied[degrees[i]];
    auto counts = apportion(w, n);

    auto stubs_of = [&](std::size_t i) { return degrees[i] * counts[i]; };
    std::size_t total = 0;
    for (std::size_t i = 0; i < c; ++i) total += stubs_of(i);
    if (total % 2 == 1) {
        // Move one node from an odd-degree class to an even-degree class.
        std::optional<std::size_t> from, to;
        for (std::size_t i = 0; i < c; ++i) {
            if (degrees[i] % 2 == 1 && counts[i] > 0 && (!from || counts[i] > counts[*from])) from = i;
            if (degrees[i] % 2 == 0 && (!to || counts[i] > counts[*to])) to = i;
        }
        if (!from || !to) throw ConstructionError("odd stub total cannot be repaired for this joint distribution");
        --counts[*from];
        ++counts[*to];
        ++local.parity_adjustments;
        total = 0;
        for (std::size_t i = 0; i < c; ++i) total += stubs_of(i);
    }
    const double m_edges = static_cast<double>(total) / 2.0;

    // e[i][j] = edges between classes i and j (i != j); diagonal derived from residual stubs.
    std::vector<std::vector<std::int64_t>> e(c, std::vector<std::int64_t>(c, 0));
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = i + 1; j < c; ++j) {
            e[i][j] = e[j][i] = std::llround(2.0 * m_edges * joint.at(i, j));
        }
    auto residual = [&](std::size_t i) {
        std::int64_t r = static_cast<std::int64_t>(stubs_of(i));
        for (std::size_t j = 0; j < c; ++j)
            if (j != i) r -= e[i][j];
        return r;
    };
    // Residual parities sum to an even number; pair odd classes and shift one edge between them.
    std::vector<std::size_t> odd;
    for (std::size_t i = 0; i < c; ++i)
        if (residual(i) % 2 != 0) odd.push_back(i);
    while (odd.size() >= 2) {
        std::size_t a = odd[0];
        std::size_t pick = 1;
        for (std::size_t t = 1; t < odd.size(); ++t)
            if (joint.at(a, odd[t]) > 0.0) {
                pick = t;
                break;
            }
        std::size_t b = odd[pick];
        std::int64_t delta = (residual(a) > 0 && residual(b) > 0) ? 1 : -1;
        if (delta < 0 && e[a][b] == 0) throw ConstructionError("infeasible edge counts between degree classes");
        e[a][b] += delta;
        e[b][a] += delta;
        odd.erase(odd.begin() + static_cast<std::ptrdiff_t>(pick));
        odd.erase(odd.begin());
    }
    for (std::size_t i = 0; i < c; ++i) {
        if (residual(i) < 0) throw ConstructionError("infeasible edge counts between degree classes");
        e[i][i] = residual(i) / 2;
    }

    // Node ids are shuffled so classes do not occupy contiguous id ranges.
    std::vector<std::size_t> cls;
    for (std::size_t i = 0; i < c; ++i) cls.insert(cls.end(), counts[i], i);
    std::shuffle(cls.begin(), cls.end(), rng);
    std::vector<std::vector<NodeId>> stubs(c);
    for (std::size_t v = 0; v < n; ++v) stubs[cls[v]].insert(stubs[cls[v]].end(), degrees[cls[v]], static_cast<NodeId>(v));
    for (auto& s : stubs) std::shuffle(s.begin(), s.end(), rng);

    // segment[i][j]: offset into class i stubs reserved for partner class j.
    std::vector<std::vector<std::size_t>> offset(c, std::vector<std::size_t>(c + 1, 0));
    for (std::size_t i = 0; i < c; ++i) {
        std::size_t pos = 0;
        for (std::size_t j = 0; j < c; ++j) {
            offset[i][j] = pos;
            pos += static_cast<std::size_t>(i == j ? 2 * e[i][i] : e[i][j]);
        }
        offset[i][c] = pos;
    }

    std::vector<Edge> edges;
    std::vector<std::uint32_t> group;
    std::vector<bool> diagonal;
    edges.reserve(total / 2);
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = i; j < c; ++j) {
            auto gid = static_cast<std::uint32_t>(diagonal.size());
            diagonal.push_back(i == j);
            if (i == j) {
                for (std::int64_t t = 0; t < e[i][i]; ++t) {
                    std::size_t base = offset[i][i] + 2 * static_cast<std::size_t>(t);
                    edges.emplace_back(stubs[i][base], stubs[i][base + 1]);
                    group.push_back(gid);
                }
            } else {
                for (std::int64_t t = 0; t < e[i][j]; ++t) {
                    edges.emplace_back(stubs[i][offset[i][j] + static_cast<std::size_t>(t)],
                                       stubs[j][offset[j][i] + static_cast<std::size_t>(t)]);
                    group.push_back(gid);
                }
            }
        }
    }

    repair_defects(edges, group, diagonal, rng, local);
    if (report) *report = local;
    return Graph::from_edges(n, edges);
}

}  // namespace cascadelab
