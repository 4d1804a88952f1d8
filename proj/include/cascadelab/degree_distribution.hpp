#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "cascadelab/graph.hpp"

namespace cascadelab {

// Node degree distribution P_k over k = 0..kmax.
class DegreeDistribution {
public:
    DegreeDistribution() = default;

    // Validates non-negativity and normalization (1e-12); kmax is trimmed to
    // the largest degree with nonzero mass.
    explicit DegreeDistribution(std::vector<double> probabilities);

    // Normalizes arbitrary non-negative weights keyed by degree.
    static DegreeDistribution from_weights(const std::map<std::size_t, double>& weights);

    // Poisson(z) truncated at kmax and renormalized.
    static DegreeDistribution poisson(double mean, std::size_t kmax);

    // Truncation used for Erdos-Renyi sums: max(30, ceil(z + 10 sqrt(z))).
    static std::size_t poisson_cutoff(double mean);

    double operator[](std::size_t k) const noexcept { return k < p_.size() ? p_[k] : 0.0; }
    std::size_t kmax() const noexcept { return p_.empty() ? 0 : p_.size() - 1; }
    std::span<const double> probabilities() const noexcept { return p_; }

    double mean_degree() const noexcept;

    // Degrees with P_k > 0, ascending.
    std::vector<std::size_t> support() const;

private:
    std::vector<double> p_;
};

// Symmetric edge-end degree distribution P(k, k') stored densely over the
// degree classes that carry edges (all degrees >= 1).
class JointDegreeDistribution {
public:
    JointDegreeDistribution() = default;

    // `matrix` is row-major over `degrees` (ascending, distinct, >= 1).
    JointDegreeDistribution(std::vector<std::size_t> degrees, std::vector<double> matrix);

    // Builds from unordered (k, k', weight) entries. An off-diagonal entry sets
    // both P(k,k') and P(k',k) to the same weight; all weights are then
    // normalized to total one.
    static JointDegreeDistribution from_weights(
        const std::vector<std::tuple<std::size_t, std::size_t, double>>& entries);

    // P(k,k') = k P_k k' P_k' / z^2.
    static JointDegreeDistribution factorized(const DegreeDistribution& dist);

    std::span<const std::size_t> degrees() const noexcept { return degrees_; }
    std::size_t class_count() const noexcept { return degrees_.size(); }

    // By class index.
    double at(std::size_t i, std::size_t j) const { return p_[i * degrees_.size() + j]; }
    // By degree value; zero when either degree is absent.
    double probability(std::size_t k, std::size_t kp) const;

    std::optional<std::size_t> class_of(std::size_t k) const;

    // Sum over k' of P(k_i, k'), i.e. the edge-end marginal k P_k / z.
    double row_sum(std::size_t i) const;

    // P_k proportional to row_sum(k) / k.
    DegreeDistribution implied_degree_distribution() const;

private:
    std::vector<std::size_t> degrees_;
    std::vector<double> p_;
};

DegreeDistribution degree_distribution(const Graph& g);

// Throws UndefinedError for an edgeless graph.
JointDegreeDistribution joint_degree_distribution(const Graph& g);

// Pearson correlation of endpoint degrees over both orientations of every
// edge. Empty when fewer than two edges or when endpoint degrees are constant.
std::optional<double> assortativity(const Graph& g);

}  // namespace cascadelab
