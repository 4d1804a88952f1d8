#include "cascadelab/degree_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cascadelab/error.hpp"

namespace cascadelab {

namespace {

constexpr double kNormTolerance = 1e-12;

}  // namespace

DegreeDistribution::DegreeDistribution(std::vector<double> probabilities) : p_(std::move(probabilities)) {
    double total = 0.0;
    for (double p : p_) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("degree probabilities must be finite and non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > kNormTolerance)
        throw ConfigError("degree probabilities sum to " + std::to_string(total) + ", expected 1");
    while (p_.size() > 1 && p_.back() == 0.0) p_.pop_back();
}

DegreeDistribution DegreeDistribution::from_weights(const std::map<std::size_t, double>& weights) {
    if (weights.empty()) throw ConfigError("empty degree distribution");
    double total = 0.0;
    for (auto [k, w] : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("degree weights must be finite and non-negative");
        total += w;
    }
    if (total <= 0.0) throw ConfigError("degree weights sum to zero");
    std::vector<double> p(weights.rbegin()->first + 1, 0.0);
    for (auto [k, w] : weights) p[k] = w / total;
    // Re-normalize once more so the sum is as close to 1 as rounding allows.
    double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& x : p) x /= s;
    return DegreeDistribution(std::move(p));
}

std::size_t DegreeDistribution::poisson_cutoff(double mean) {
    return std::max<std::size_t>(30, static_cast<std::size_t>(std::ceil(mean + 10.0 * std::sqrt(mean))));
}

DegreeDistribution DegreeDistribution::poisson(double mean, std::size_t kmax) {
    if (!(mean > 0.0) || !std::isfinite(mean)) throw ConfigError("Poisson mean must be positive");
    std::vector<double> p(kmax + 1);
    for (std::size_t k = 0; k <= kmax; ++k) {
        p[k] = std::exp(static_cast<double>(k) * std::log(mean) - mean - std::lgamma(static_cast<double>(k) + 1.0));
    }
    double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& x : p) x /= s;
    return DegreeDistribution(std::move(p));
}

double DegreeDistribution::mean_degree() const noexcept {
    double z = 0.0;
    for (std::size_t k = 0; k < p_.size(); ++k) z += static_cast<double>(k) * p_[k];
    return z;
}

std::vector<std::size_t> DegreeDistribution::support() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < p_.size(); ++k)
        if (p_[k] > 0.0) out.push_back(k);
    return out;
}

JointDegreeDistribution::JointDegreeDistribution(std::vector<std::size_t> degrees, std::vector<double> matrix)
    : degrees_(std::move(degrees)), p_(std::move(matrix)) {
    const std::size_t n = degrees_.size();
    if (n == 0) throw ConfigError("joint degree distribution needs at least one degree class");
    if (p_.size() != n * n) throw ConfigError("joint degree matrix has the wrong size");
    for (std::size_t i = 0; i < n; ++i) {
        if (degrees_[i] == 0) throw ConfigError("degree-0 nodes carry no edges and cannot appear in P(k,k')");
        if (i > 0 && degrees_[i] <= degrees_[i - 1]) throw ConfigError("joint degree classes must be ascending and distinct");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double v = at(i, j);
            if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("joint probabilities must be finite and non-negative");
            if (std::abs(v - at(j, i)) > kNormTolerance) throw ConfigError("joint degree distribution must be symmetric");
            total += v;
        }
    }
    if (std::abs(total - 1.0) > kNormTolerance)
        throw ConfigError("joint probabilities sum to " + std::to_string(total) + ", expected 1");
    for (std::size_t i = 0; i < n; ++i)
        if (row_sum(i) <= 0.0) throw ConfigError("degree class " + std::to_string(degrees_[i]) + " has no edges");
}

JointDegreeDistribution JointDegreeDistribution::from_weights(
    const std::vector<std::tuple<std::size_t, std::size_t, double>>& entries) {
    std::vector<std::size_t> degrees;
    for (auto& [k, kp, w] : entries) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("joint weights must be finite and non-negative");
        if (w > 0.0) {
            degrees.push_back(k);
            degrees.push_back(kp);
        }
    }
    std::sort(degrees.begin(), degrees.end());
    degrees.erase(std::unique(degrees.begin(), degrees.end()), degrees.end());
    const std::size_t n = degrees.size();
    if (n == 0) throw ConfigError("joint weights are all zero");
    auto index = [&degrees](std::size_t k) {
        return static_cast<std::size_t>(std::lower_bound(degrees.begin(), degrees.end(), k) - degrees.begin());
    };
    std::vector<double> m(n * n, 0.0);
    for (auto& [k, kp, w] : entries) {
        if (w <= 0.0) continue;
        std::size_t i = index(k), j = index(kp);
        m[i * n + j] = w;
        m[j * n + i] = w;
    }
    double total = std::accumulate(m.begin(), m.end(), 0.0);
    for (double& x : m) x /= total;
    return JointDegreeDistribution(std::move(degrees), std::move(m));
}

JointDegreeDistribution JointDegreeDistribution::factorized(const DegreeDistribution& dist) {
    const double z = dist.mean_degree();
    if (!(z > 0.0)) throw ConfigError("factorized joint distribution needs a positive mean degree");
    std::vector<std::size_t> degrees;
    for (std::size_t k : dist.support())
        if (k > 0) degrees.push_back(k);
    const std::size_t n = degrees.size();
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = static_cast<double>(degrees[i]) * dist[degrees[i]] / z;
    std::vector<double> m(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i * n + j] = w[i] * w[j];
    return JointDegreeDistribution(std::move(degrees), std::move(m));
}

double JointDegreeDistribution::probability(std::size_t k, std::size_t kp) const {
    auto i = class_of(k), j = class_of(kp);
    return (i && j) ? at(*i, *j) : 0.0;
}

std::optional<std::size_t> JointDegreeDistribution::class_of(std::size_t k) const {
    auto it = std::lower_bound(degrees_.begin(), degrees_.end(), k);
    if (it == degrees_.end() || *it != k) return std::nullopt;
    return static_cast<std::size_t>(it - degrees_.begin());
}

double JointDegreeDistribution::row_sum(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < degrees_.size(); ++j) s += at(i, j);
    return s;
}

DegreeDistribution JointDegreeDistribution::implied_degree_distribution() const {
    std::map<std::size_t, double> w;
    for (std::size_t i = 0; i < degrees_.size(); ++i) w[degrees_[i]] = row_sum(i) / static_cast<double>(degrees_[i]);
    return DegreeDistribution::from_weights(w);
}

DegreeDistribution degree_distribution(const Graph& g) {
    const std::size_t n = g.node_count();
    if (n == 0) throw UndefinedError("degree distribution of an empty graph");
    std::vector<double> p(g.max_degree() + 1, 0.0);
    for (auto& [k, nodes] : g.degree_index()) p[k] = static_cast<double>(nodes.size()) / static_cast<double>(n);
    return DegreeDistribution(std::move(p));
}

JointDegreeDistribution joint_degree_distribution(const Graph& g) {
    if (g.edge_count() == 0) throw UndefinedError("joint degree distribution of an edgeless graph");
    std::vector<std::size_t> degrees;
    for (auto& [k, nodes] : g.degree_index())
        if (k > 0) degrees.push_back(k);
    const std::size_t n = degrees.size();
    std::vector<std::size_t> cls(g.max_degree() + 1, 0);
    for (std::size_t i = 0; i < n; ++i) cls[degrees[i]] = i;

    std::vector<double> counts(n * n, 0.0);
    for (auto [u, v] : g.edges()) {
        std::size_t a = cls[g.degree(u)], b = cls[g.degree(v)];
        counts[a * n + b] += 1.0;
        counts[b * n + a] += 1.0;
    }
    const double ends = 2.0 * static_cast<double>(g.edge_count());
    for (double& c : counts) c /= ends;
    return JointDegreeDistribution(std::move(degrees), std::move(counts));
}

std::optional<double> assortativity(const Graph& g) {
    if (g.edge_count() < 2) return std::nullopt;
    // Both orientations of each edge: the two endpoint marginals coincide.
    double sum = 0.0, sum_sq = 0.0, sum_prod = 0.0;
    for (auto [u, v] : g.edges()) {
        const double a = static_cast<double>(g.degree(u));
        const double b = static_cast<double>(g.degree(v));
        sum += a + b;
        sum_sq += a * a + b * b;
        sum_prod += 2.0 * a * b;
    }
    const double m = 2.0 * static_cast<double>(g.edge_count());
    const double mean = sum / m;
    const double var = sum_sq / m - mean * mean;
    if (var <= 1e-14 * std::max(1.0, mean * mean)) return std::nullopt;
    return (sum_prod / m - mean * mean) / var;
}

}  // namespace cascadelab
