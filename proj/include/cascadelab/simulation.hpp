#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "cascadelab/graph.hpp"
#include "cascadelab/response.hpp"
#include "cascadelab/time_series.hpp"

namespace cascadelab {

enum class UpdateMode : std::uint8_t { Asynchronous, Synchronous };

// Fixed: every realization reuses one seed set drawn from the master seed.
// Resample: each realization draws its own seeds.
enum class SeedPolicy : std::uint8_t { Resample, Fixed };

struct SimConfig {
    double phi1 = 0.0;
    double phi2 = 0.0;
    UpdateMode mode = UpdateMode::Asynchronous;
    double t_max = 50.0;
    std::size_t realizations = 1;
    std::uint64_t rng_seed = 1;
    SeedPolicy seed_policy = SeedPolicy::Resample;
    std::size_t grid_points = 200;
    // Worker threads for the ensemble; 0 = hardware concurrency.
    unsigned threads = 0;

    // Throws ConfigError on phi outside [0,1], phi2 > phi1, t_max <= 0, or no realizations.
    void validate() const;
};

// round(phi n) with ties to even.
std::size_t seed_count(double phi, std::size_t n);

// Seeded nodes. Every S2 seed is also listed in s1.
struct SeedSets {
    std::vector<NodeId> s1;
    std::vector<NodeId> s2;
};

// Draws round(phi1 N) S1 seeds uniformly, then round(phi2 N) of them as S2.
SeedSets draw_seeds(std::size_t n, double phi1, double phi2, std::mt19937_64& rng);

// Quenched per-node thresholds for one realization.
struct NodeThresholds {
    std::vector<double> r1;
    std::vector<double> r2;

    static NodeThresholds sample(const ResponseSpec& spec, std::size_t n, std::mt19937_64& rng);
};

struct StageChange {
    NodeId node;
    Stage from;
    Stage to;
};

// Mutable dynamics state on one graph with incrementally maintained
// neighbor counts m1[v] = #{u ~ v : stage u >= S1} and m2[v] = #{u ~ v : stage u = S2}.
//
// A node is "ready" when its next update would upgrade it; the ready count
// reaching zero means no node can ever change again.
class SimState {
public:
    SimState(const Graph& g, const ResponseSpec& spec, NodeThresholds thresholds);

    // Raises the listed nodes to at least their seeded stage.
    void seed(const SeedSets& seeds);

    std::optional<StageChange> update_node(NodeId v);

    // One asynchronous step: a uniformly chosen node is updated and the clock advances by 1/N.
    std::optional<StageChange> step_async(std::mt19937_64& rng);

    // All nodes updated from the pre-step state; clock advances by 1. Returns the number of changes.
    std::size_t step_sync();

    bool at_fixpoint() const noexcept { return ready_count_ == 0; }
    double time() const noexcept { return time_; }

    Stage stage(NodeId v) const { return stage_[v]; }
    std::uint32_t m1(NodeId v) const { return m1_[v]; }
    std::uint32_t m2(NodeId v) const { return m2_[v]; }
    const std::vector<Stage>& stages() const noexcept { return stage_; }

    // Degree classes of the graph (ascending) and their active counts.
    const std::vector<std::size_t>& class_degrees() const noexcept { return class_degree_; }
    const std::vector<std::size_t>& class_sizes() const noexcept { return class_size_; }
    const std::vector<std::size_t>& class_s1() const noexcept { return class_s1_; }
    const std::vector<std::size_t>& class_s2() const noexcept { return class_s2_; }

    // Recomputes neighbor counts and readiness from scratch and compares.
    bool caches_consistent() const;

private:
    Stage target(NodeId v) const;
    void set_stage(NodeId v, Stage to);
    void refresh_ready(NodeId v);

    const Graph* g_;
    ResponseSpec spec_;
    NodeThresholds thresholds_;
    std::vector<Stage> stage_;
    std::vector<std::uint32_t> m1_;
    std::vector<std::uint32_t> m2_;
    std::vector<char> ready_;
    std::size_t ready_count_ = 0;
    double time_ = 0.0;

    std::vector<std::size_t> node_class_;
    std::vector<std::size_t> class_degree_;
    std::vector<std::size_t> class_size_;
    std::vector<std::size_t> class_s1_;
    std::vector<std::size_t> class_s2_;
};

// Per-class active counts of one realization on the output grid.
struct RealizationTrace {
    std::vector<std::size_t> class_degrees;
    std::vector<std::size_t> class_sizes;
    // [grid index][class]
    std::vector<std::vector<std::size_t>> s1;
    std::vector<std::vector<std::size_t>> s2;
    std::vector<std::size_t> final_s1;
    std::vector<std::size_t> final_s2;
    double stop_time = 0.0;
    bool reached_fixpoint = false;
};

// One realization from explicit seeds and thresholds. Asynchronous runs stop
// at the first fixpoint or after ceil(t_max N) steps; later grid points
// repeat the final state.
RealizationTrace run_realization(const Graph& g, const ResponseSpec& spec, const SimConfig& cfg,
                                 const SeedSets& seeds, NodeThresholds thresholds, std::mt19937_64& rng);

// Supplies the graph for a realization index. Must be safe to call concurrently.
using GraphSource = std::function<const Graph&(std::size_t realization)>;

// Ensemble mean over cfg.realizations independent runs. Realization r uses an
// RNG stream derived from (cfg.rng_seed, r); results are merged in index
// order, so the output does not depend on the thread count. Per-class
// densities pool counts over realizations.
TimeSeries run(const GraphSource& graphs, const ResponseSpec& spec, const SimConfig& cfg);
TimeSeries run(const Graph& g, const ResponseSpec& spec, const SimConfig& cfg);

// Stream for realization r of an ensemble.
std::mt19937_64 realization_rng(std::uint64_t master_seed, std::uint64_t index);

// Brute-force fixpoint by repeated full synchronous sweeps that recompute
// every neighbor count from the stage vector. Requires deterministic thresholds.
std::vector<Stage> final_state_oracle(const Graph& g, const ResponseSpec& spec, const NodeThresholds& thresholds,
                                      const SeedSets& seeds);

}  // namespace cascadelab
