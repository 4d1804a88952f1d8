#include "cascadelab/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "cascadelab/error.hpp"
#include "cascadelab/parallel.hpp"

namespace cascadelab {

std::vector<double> uniform_grid(double t_max, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {t_max};
    std::vector<double> t(n);
    for (std::size_t j = 0; j < n; ++j) t[j] = t_max * static_cast<double>(j) / static_cast<double>(n - 1);
    return t;
}

void SimConfig::validate() const {
    if (!(phi1 >= 0.0 && phi1 <= 1.0)) throw ConfigError("phi1 must lie in [0, 1]");
    if (!(phi2 >= 0.0 && phi2 <= 1.0)) throw ConfigError("phi2 must lie in [0, 1]");
    if (phi2 > phi1) throw ConfigError("phi2 must not exceed phi1 (S2 seeds are also S1-active)");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max must be positive");
    if (realizations == 0) throw ConfigError("need at least one realization");
    if (grid_points < 2) throw ConfigError("need at least two grid points");
}

std::size_t seed_count(double phi, std::size_t n) {
    return static_cast<std::size_t>(std::nearbyint(phi * static_cast<double>(n)));
}

SeedSets draw_seeds(std::size_t n, double phi1, double phi2, std::mt19937_64& rng) {
    const std::size_t c1 = seed_count(phi1, n);
    const std::size_t c2 = seed_count(phi2, n);
    if (c2 > c1) throw ConfigError("more S2 seeds than S1 seeds");
    if (c1 > n) throw ConfigError("more seeds than nodes");
    // Partial Fisher-Yates.
    std::vector<NodeId> ids(n);
    for (std::size_t v = 0; v < n; ++v) ids[v] = static_cast<NodeId>(v);
    for (std::size_t i = 0; i < c1; ++i) {
        std::size_t j = std::uniform_int_distribution<std::size_t>(i, n - 1)(rng);
        std::swap(ids[i], ids[j]);
    }
    SeedSets s;
    s.s1.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(c1));
    // The first c1 entries are already a uniform random permutation prefix.
    s.s2.assign(s.s1.begin(), s.s1.begin() + static_cast<std::ptrdiff_t>(c2));
    return s;
}

NodeThresholds NodeThresholds::sample(const ResponseSpec& spec, std::size_t n, std::mt19937_64& rng) {
    NodeThresholds t;
    t.r1.resize(n);
    t.r2.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        t.r1[v] = spec.thresholds[0].sample(rng);
        t.r2[v] = spec.thresholds[1].sample(rng);
    }
    return t;
}

namespace {

Stage next_stage(Stage current, double pressure, double r1, double r2) {
    if (current == Stage::S2 || !reaches(pressure, r1)) return current;
    return reaches(pressure, r2) ? Stage::S2 : Stage::S1;
}

double pressure_of(const ResponseSpec& spec, std::size_t m1, std::size_t m2, std::size_t k) {
    const double denom = spec.scale == PressureScale::Count ? 1.0 : static_cast<double>(k);
    return (static_cast<double>(m1) + spec.beta * static_cast<double>(m2)) / denom;
}

}  // namespace

SimState::SimState(const Graph& g, const ResponseSpec& spec, NodeThresholds thresholds)
    : g_(&g), spec_(spec), thresholds_(std::move(thresholds)) {
    const std::size_t n = g.node_count();
    if (thresholds_.r1.size() != n || thresholds_.r2.size() != n)
        throw ConfigError("threshold vectors do not match the node count");
    stage_.assign(n, Stage::S0);
    m1_.assign(n, 0);
    m2_.assign(n, 0);
    ready_.assign(n, 0);
    node_class_.assign(n, 0);
    for (auto& [k, nodes] : g.degree_index()) {
        for (NodeId v : nodes) node_class_[v] = class_degree_.size();
        class_degree_.push_back(k);
        class_size_.push_back(nodes.size());
    }
    class_s1_.assign(class_degree_.size(), 0);
    class_s2_.assign(class_degree_.size(), 0);
    for (NodeId v = 0; v < n; ++v) refresh_ready(v);
}

Stage SimState::target(NodeId v) const {
    const std::size_t k = g_->degree(v);
    if (k == 0) return stage_[v];
    return next_stage(stage_[v], pressure_of(spec_, m1_[v], m2_[v], k), thresholds_.r1[v], thresholds_.r2[v]);
}

void SimState::refresh_ready(NodeId v) {
    const char now = stage_[v] < target(v) ? 1 : 0;
    if (now != ready_[v]) {
        ready_count_ += now ? 1 : static_cast<std::size_t>(-1);
        ready_[v] = now;
    }
}

void SimState::set_stage(NodeId v, Stage to) {
    const Stage from = stage_[v];
    if (!(from < to)) return;
    stage_[v] = to;
    const bool gains_s1 = from == Stage::S0;
    const bool gains_s2 = to == Stage::S2;
    if (gains_s1) ++class_s1_[node_class_[v]];
    if (gains_s2) ++class_s2_[node_class_[v]];
    for (NodeId u : g_->neighbors(v)) {
        if (gains_s1) ++m1_[u];
        if (gains_s2) ++m2_[u];
        refresh_ready(u);
    }
    refresh_ready(v);
}

void SimState::seed(const SeedSets& seeds) {
    for (NodeId v : seeds.s1) set_stage(v, Stage::S1);
    for (NodeId v : seeds.s2) set_stage(v, Stage::S2);
}

std::optional<StageChange> SimState::update_node(NodeId v) {
    if (!ready_[v]) return std::nullopt;
    const Stage from = stage_[v];
    const Stage to = target(v);
    set_stage(v, to);
    return StageChange{v, from, to};
}

std::optional<StageChange> SimState::step_async(std::mt19937_64& rng) {
    const std::size_t n = g_->node_count();
    const auto v = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    time_ += 1.0 / static_cast<double>(n);
    return update_node(v);
}

std::size_t SimState::step_sync() {
    std::vector<std::pair<NodeId, Stage>> changes;
    for (NodeId v = 0; v < stage_.size(); ++v)
        if (ready_[v]) changes.emplace_back(v, target(v));
    for (auto [v, to] : changes) set_stage(v, to);
    time_ += 1.0;
    return changes.size();
}

bool SimState::caches_consistent() const {
    std::size_t ready = 0;
    for (NodeId v = 0; v < stage_.size(); ++v) {
        std::uint32_t a = 0, b = 0;
        for (NodeId u : g_->neighbors(v)) {
            a += stage_[u] >= Stage::S1;
            b += stage_[u] == Stage::S2;
        }
        if (a != m1_[v] || b != m2_[v]) return false;
        const bool r = stage_[v] < target(v);
        if (r != static_cast<bool>(ready_[v])) return false;
        ready += r;
    }
    return ready == ready_count_;
}

RealizationTrace run_realization(const Graph& g, const ResponseSpec& spec, const SimConfig& cfg,
                                 const SeedSets& seeds, NodeThresholds thresholds, std::mt19937_64& rng) {
    const std::size_t n = g.node_count();
    if (n == 0) throw ConfigError("cannot simulate on an empty graph");
    SimState state(g, spec, std::move(thresholds));
    state.seed(seeds);

    RealizationTrace trace;
    trace.class_degrees = state.class_degrees();
    trace.class_sizes = state.class_sizes();

    const auto grid = uniform_grid(cfg.t_max, cfg.grid_points);
    const bool async = cfg.mode == UpdateMode::Asynchronous;
    const double steps_per_unit = async ? static_cast<double>(n) : 1.0;
    std::vector<std::size_t> grid_step(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
        grid_step[j] = static_cast<std::size_t>(std::floor(grid[j] * steps_per_unit + 1e-9));

    std::size_t step = 0;
    std::size_t j = 0;
    auto record = [&] {
        trace.s1.push_back(state.class_s1());
        trace.s2.push_back(state.class_s2());
        ++j;
    };
    while (j < grid.size()) {
        while (j < grid.size() && step >= grid_step[j]) record();
        if (j >= grid.size()) break;
        if (state.at_fixpoint()) {
            while (j < grid.size()) record();
            break;
        }
        if (async)
            state.step_async(rng);
        else
            state.step_sync();
        ++step;
    }
    trace.final_s1 = state.class_s1();
    trace.final_s2 = state.class_s2();
    trace.stop_time = static_cast<double>(step) / steps_per_unit;
    trace.reached_fixpoint = state.at_fixpoint();
    return trace;
}

std::mt19937_64 realization_rng(std::uint64_t master_seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5eedu};
    return std::mt19937_64(seq);
}

TimeSeries run(const GraphSource& graphs, const ResponseSpec& spec, const SimConfig& cfg) {
    cfg.validate();
    spec.validate();
    const std::size_t runs = cfg.realizations;

    std::optional<SeedSets> fixed_seeds;
    if (cfg.seed_policy == SeedPolicy::Fixed) {
        auto rng = realization_rng(cfg.rng_seed, ~std::uint64_t{0});
        fixed_seeds = draw_seeds(graphs(0).node_count(), cfg.phi1, cfg.phi2, rng);
    }

    std::vector<RealizationTrace> traces(runs);
    parallel_for(runs, cfg.threads, [&](std::size_t r) {
        const Graph& g = graphs(r);
        auto rng = realization_rng(cfg.rng_seed, r);
        SeedSets seeds = fixed_seeds ? *fixed_seeds : draw_seeds(g.node_count(), cfg.phi1, cfg.phi2, rng);
        auto thresholds = NodeThresholds::sample(spec, g.node_count(), rng);
        traces[r] = run_realization(g, spec, cfg, seeds, std::move(thresholds), rng);
    });

    TimeSeries ts;
    ts.t = uniform_grid(cfg.t_max, cfg.grid_points);
    for (const auto& tr : traces) ts.degrees.insert(ts.degrees.end(), tr.class_degrees.begin(), tr.class_degrees.end());
    std::sort(ts.degrees.begin(), ts.degrees.end());
    ts.degrees.erase(std::unique(ts.degrees.begin(), ts.degrees.end()), ts.degrees.end());
    const std::size_t classes = ts.degrees.size();
    const std::size_t points = ts.t.size();

    std::vector<double> pool_size(classes, 0.0);
    std::vector<std::vector<double>> s1(classes, std::vector<double>(points, 0.0)), s2 = s1;
    std::vector<double> f1(classes, 0.0), f2(classes, 0.0);
    ts.rho1.assign(points, 0.0);
    ts.rho2.assign(points, 0.0);
    for (const auto& tr : traces) {
        double n = 0.0;
        for (auto sz : tr.class_sizes) n += static_cast<double>(sz);
        double a1 = 0.0, a2 = 0.0;
        for (std::size_t c = 0; c < tr.class_degrees.size(); ++c) {
            const std::size_t dst = ts.class_index(tr.class_degrees[c]);
            pool_size[dst] += static_cast<double>(tr.class_sizes[c]);
            for (std::size_t j = 0; j < points; ++j) {
                s1[dst][j] += static_cast<double>(tr.s1[j][c]);
                s2[dst][j] += static_cast<double>(tr.s2[j][c]);
            }
            f1[dst] += static_cast<double>(tr.final_s1[c]);
            f2[dst] += static_cast<double>(tr.final_s2[c]);
            a1 += static_cast<double>(tr.final_s1[c]);
            a2 += static_cast<double>(tr.final_s2[c]);
        }
        for (std::size_t j = 0; j < points; ++j) {
            double b1 = 0.0, b2 = 0.0;
            for (std::size_t c = 0; c < tr.class_degrees.size(); ++c) {
                b1 += static_cast<double>(tr.s1[j][c]);
                b2 += static_cast<double>(tr.s2[j][c]);
            }
            ts.rho1[j] += b1 / n / static_cast<double>(runs);
            ts.rho2[j] += b2 / n / static_cast<double>(runs);
        }
        ts.final_rho1 += a1 / n / static_cast<double>(runs);
        ts.final_rho2 += a2 / n / static_cast<double>(runs);
    }
    ts.rho1_k.assign(classes, std::vector<double>(points));
    ts.rho2_k.assign(classes, std::vector<double>(points));
    ts.final_rho1_k.resize(classes);
    ts.final_rho2_k.resize(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t j = 0; j < points; ++j) {
            ts.rho1_k[c][j] = s1[c][j] / pool_size[c];
            ts.rho2_k[c][j] = s2[c][j] / pool_size[c];
        }
        ts.final_rho1_k[c] = f1[c] / pool_size[c];
        ts.final_rho2_k[c] = f2[c] / pool_size[c];
    }
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(ts.rho1) || !finite(ts.rho2) || !std::isfinite(ts.final_rho1) || !std::isfinite(ts.final_rho2))
        throw NumericalError("non-finite density in simulation output");
    return ts;
}

TimeSeries run(const Graph& g, const ResponseSpec& spec, const SimConfig& cfg) {
    return run([&g](std::size_t) -> const Graph& { return g; }, spec, cfg);
}

std::vector<Stage> final_state_oracle(const Graph& g, const ResponseSpec& spec, const NodeThresholds& thresholds,
                                      const SeedSets& seeds) {
    const std::size_t n = g.node_count();
    std::vector<Stage> stage(n, Stage::S0);
    for (NodeId v : seeds.s1) stage[v] = Stage::S1;
    for (NodeId v : seeds.s2) stage[v] = Stage::S2;

    for (std::size_t sweep = 0; sweep <= 2 * n + 1; ++sweep) {
        std::vector<Stage> next = stage;
        bool changed = false;
        for (NodeId v = 0; v < n; ++v) {
            const std::size_t k = g.degree(v);
            if (k == 0) continue;
            std::size_t m1 = 0, m2 = 0;
            for (NodeId u : g.neighbors(v)) {
                m1 += stage[u] != Stage::S0;
                m2 += stage[u] == Stage::S2;
            }
            const double denom = spec.scale == PressureScale::Count ? 1.0 : static_cast<double>(k);
            const double p = (static_cast<double>(m1) + spec.beta * static_cast<double>(m2)) / denom;
            Stage to = stage[v];
            if (reaches(p, thresholds.r1[v]) && reaches(p, thresholds.r2[v]))
                to = Stage::S2;
            else if (reaches(p, thresholds.r1[v]) && to == Stage::S0)
                to = Stage::S1;
            if (stage[v] < to) {
                next[v] = to;
                changed = true;
            }
        }
        stage = std::move(next);
        if (!changed) return stage;
    }
    throw NumericalError("oracle did not reach a fixpoint within 2N sweeps");
}

}  // namespace cascadelab
