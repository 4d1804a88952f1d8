#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cascadelab/degree_distribution.hpp"
#include "cascadelab/graph.hpp"

namespace cascadelab {

// What a generator had to do to reach a simple graph.
struct GeneratorReport {
    // Nodes whose degree was changed to make the stub total even.
    std::size_t parity_adjustments = 0;
    // Self-loops or multi-edges removed by degree-preserving edge swaps.
    std::size_t defects_repaired = 0;
    // Defects left after the swap budget ran out; erased from the graph.
    std::size_t defects_erased = 0;
};

// Splits n items over categories in proportion to `weights` (largest remainder).
std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t n);

// Configuration model with node counts per degree class fixed by largest
// remainder apportionment of n over P_k, uniform stub matching, and
// swap-based repair of self-loops and multi-edges.
Graph generate_config_model(const DegreeDistribution& dist, std::size_t n, std::uint64_t seed,
                            GeneratorReport* report = nullptr);

// G(n, p) with p = z / (n - 1).
Graph generate_er(double mean_degree, std::size_t n, std::uint64_t seed);

// Random graph realizing the joint degree distribution: node counts from the
// implied P_k, edge counts per class pair from P(k,k') and M = sum_k k n_k / 2,
// uniform wiring within each class pair, then class-preserving defect repair.
Graph generate_correlated(const JointDegreeDistribution& joint, std::size_t n, std::uint64_t seed,
                          GeneratorReport* report = nullptr);

}  // namespace cascadelab
