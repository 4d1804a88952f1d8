#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's numerical code; inputs are plain vectors and doubles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <vector>

namespace oracle {

// Binomial pmf with the coefficient accumulated as a sum of logs.
inline double binom(std::size_t n, std::size_t m, double p) {
    if (m > n) return 0.0;
    if (p == 0.0) return m == 0 ? 1.0 : 0.0;
    if (p == 1.0) return m == n ? 1.0 : 0.0;
    double log_c = 0.0;
    for (std::size_t i = 1; i <= m; ++i) log_c += std::log(static_cast<double>(n - m + i) / static_cast<double>(i));
    return std::exp(log_c + static_cast<double>(m) * std::log(p) + static_cast<double>(n - m) * std::log1p(-p));
}

// Poisson(z) over 0..kmax by the ratio recursion, renormalized.
inline std::vector<double> poisson(double z, std::size_t kmax) {
    std::vector<double> p(kmax + 1);
    p[0] = std::exp(-z);
    for (std::size_t k = 1; k <= kmax; ++k) p[k] = p[k - 1] * z / static_cast<double>(k);
    double s = 0.0;
    for (double v : p) s += v;
    for (double& v : p) v /= s;
    return p;
}

inline std::size_t er_cutoff(double z) {
    return std::max<std::size_t>(30, static_cast<std::size_t>(std::ceil(z + 10.0 * std::sqrt(z))));
}

inline double mean(const std::vector<double>& p) {
    double z = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) z += static_cast<double>(k) * p[k];
    return z;
}

// Deterministic threshold rule: stage-i activation iff pressure >= R_i, with
// S2 also requiring S1. `count` drops the division by k.
struct Rule {
    double beta = 0.0;
    double r1 = 0.0;
    double r2 = INFINITY;
    bool count = false;

    double pressure(std::size_t m1, std::size_t m2, std::size_t k) const {
        const double raw = static_cast<double>(m1) + beta * static_cast<double>(m2);
        return count ? raw : raw / static_cast<double>(k);
    }
    bool hits(double p, double r) const {
        if (std::isinf(r)) return false;
        return p >= r - 1e-12 * std::max(1.0, std::abs(r));
    }
    double f(int stage, std::size_t m1, std::size_t m2, std::size_t k) const {
        if (k == 0) return 0.0;
        const double p = pressure(m1, m2, k);
        const bool s1 = hits(p, r1);
        if (stage == 1) return s1 ? 1.0 : 0.0;
        return s1 && hits(p, r2) ? 1.0 : 0.0;
    }
};

// Single-stage tree recurrence on an uncorrelated network: the scalar
// qbar(n+1) = sum_k k P_k / z [phi + (1 - phi) sum_{m<k} B^{k-1}_m(qbar) F(m, k)].
inline std::vector<double> single_stage_qbar(const std::vector<double>& pk, double phi,
                                             const std::function<double(std::size_t, std::size_t)>& f,
                                             std::size_t steps) {
    const double z = mean(pk);
    std::vector<double> out{phi};
    double q = phi;
    for (std::size_t n = 0; n < steps; ++n) {
        double next = 0.0;
        for (std::size_t k = 1; k < pk.size(); ++k) {
            if (pk[k] == 0.0) continue;
            double s = 0.0;
            for (std::size_t m = 0; m < k; ++m) s += binom(k - 1, m, q) * f(m, k);
            next += static_cast<double>(k) * pk[k] / z * (phi + (1.0 - phi) * s);
        }
        q = next;
        out.push_back(q);
    }
    return out;
}

// The two-stage reduced map on an uncorrelated network, evaluated by the
// nested binomial sums with the ratio clipped to [0, 1].
struct TwoStage {
    std::vector<double> pk;
    Rule rule;
    double phi1 = 0.0;
    double phi2 = 0.0;

    std::vector<double> map(double q1, double q2) const {
        const double z = mean(pk);
        const double ratio = q1 > 0.0 ? std::min(1.0, q2 / q1) : 0.0;
        double g1 = 0.0, g2 = 0.0;
        for (std::size_t k = 1; k < pk.size(); ++k) {
            if (pk[k] == 0.0) continue;
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t m1 = 0; m1 < k; ++m1)
                for (std::size_t m2 = 0; m2 <= m1; ++m2) {
                    const double w = binom(k - 1, m1, q1) * binom(m1, m2, ratio);
                    s1 += w * rule.f(1, m1, m2, k);
                    s2 += w * ((1.0 - q1) * rule.f(2, m1, m2, k) + q1 * rule.f(2, m1 + 1, m2, k));
                }
            const double e = static_cast<double>(k) * pk[k] / z;
            g1 += e * (phi1 + (1.0 - phi1) * s1);
            g2 += e * (phi2 + (1.0 - phi2) * s2);
        }
        return {g1, g2};
    }

    std::vector<double> rho(double q1, double q2) const {
        const double ratio = q1 > 0.0 ? std::min(1.0, q2 / q1) : 0.0;
        double r1 = 0.0, r2 = 0.0;
        for (std::size_t k = 0; k < pk.size(); ++k) {
            if (pk[k] == 0.0) continue;
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t m1 = 0; m1 <= k; ++m1)
                for (std::size_t m2 = 0; m2 <= m1; ++m2) {
                    const double w = binom(k, m1, q1) * binom(m1, m2, ratio);
                    s1 += w * rule.f(1, m1, m2, k);
                    s2 += w * rule.f(2, m1, m2, k);
                }
            r1 += pk[k] * (phi1 + (1.0 - phi1) * s1);
            r2 += pk[k] * (phi2 + (1.0 - phi2) * s2);
        }
        return {r1, r2};
    }
};

// Brute-force final stages (0, 1, 2) on an adjacency list: repeat full
// passes until nothing changes, recomputing every count from scratch.
inline std::vector<int> final_stages(const std::vector<std::vector<std::size_t>>& adj, const Rule& rule,
                                     const std::vector<double>& r1, const std::vector<double>& r2,
                                     std::vector<int> stage) {
    for (bool changed = true; changed;) {
        changed = false;
        std::vector<int> next = stage;
        for (std::size_t v = 0; v < adj.size(); ++v) {
            const std::size_t k = adj[v].size();
            if (k == 0 || stage[v] == 2) continue;
            std::size_t m1 = 0, m2 = 0;
            for (std::size_t u : adj[v]) {
                m1 += stage[u] >= 1;
                m2 += stage[u] == 2;
            }
            const double p = rule.pressure(m1, m2, k);
            int target = 0;
            if (rule.hits(p, r1[v])) target = rule.hits(p, r2[v]) ? 2 : 1;
            if (target > stage[v]) {
                next[v] = target;
                changed = true;
            }
        }
        stage = next;
    }
    return stage;
}

// Pearson correlation of endpoint degrees over both edge orientations.
inline double assortativity(const std::vector<std::vector<std::size_t>>& adj) {
    double sx = 0, sxx = 0, sxy = 0, n = 0;
    for (std::size_t v = 0; v < adj.size(); ++v)
        for (std::size_t u : adj[v]) {
            const double a = static_cast<double>(adj[v].size()), b = static_cast<double>(adj[u].size());
            sx += a;
            sxx += a * a;
            sxy += a * b;
            n += 1;
        }
    const double m = sx / n;
    return (sxy / n - m * m) / (sxx / n - m * m);
}

}  // namespace oracle
