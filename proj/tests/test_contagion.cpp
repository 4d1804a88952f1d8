#include <doctest.h>

#include <random>

#include "cascadelab/error.hpp"
#include "cascadelab/generators.hpp"
#include "cascadelab/response.hpp"
#include "cascadelab/simulation.hpp"
#include "oracles.hpp"

using namespace cascadelab;

namespace {

std::vector<std::vector<std::size_t>> adjacency(const Graph& g) {
    std::vector<std::vector<std::size_t>> adj(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (NodeId u : g.neighbors(v)) adj[v].push_back(u);
    return adj;
}

Graph random_small_graph(std::mt19937_64& rng) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 50)(rng);
    const double p = std::uniform_real_distribution<double>(0.02, 0.4)(rng);
    std::vector<Edge> edges;
    std::bernoulli_distribution coin(p);
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (coin(rng)) edges.emplace_back(u, v);
    return Graph::from_edges(n, edges);
}

std::vector<int> as_ints(const std::vector<Stage>& s) {
    std::vector<int> out;
    for (Stage x : s) out.push_back(static_cast<int>(x));
    return out;
}

SeedSets explicit_seeds(std::vector<NodeId> s1, std::vector<NodeId> s2) { return {std::move(s1), std::move(s2)}; }

}  // namespace

TEST_CASE("peer pressure") {
    CHECK(*peer_pressure(2, 1, 4, 0.5) == doctest::Approx(0.625));
    CHECK(*peer_pressure(0, 0, 7, 3.0) == 0.0);
    CHECK(*peer_pressure(5, 5, 5, 2.0) == doctest::Approx(3.0));
    CHECK_FALSE(peer_pressure(0, 0, 0, 1.0));
    CHECK(*scaled_pressure(ResponseSpec::count_uniform(1, 5, 0.25), 4, 4, 4) == doctest::Approx(5.0));
}

TEST_CASE("response functions") {
    SUBCASE("activation at equality") {
        CHECK(response(ResponseSpec::fraction_uniform(0.15, 0.3, 0.0), 1, 3, 0, 20) == 1.0);
    }
    SUBCASE("count scale steps at beta = 1/4") {
        CHECK(response(ResponseSpec::count_uniform(1, 5, 0.25), 2, 4, 4, 4) == 1.0);
        CHECK(response(ResponseSpec::count_uniform(1, 5, 0.24), 2, 4, 4, 4) == 0.0);
    }
    SUBCASE("rational beta hits its step") {
        // 3 + 6 * (1/3) = 5 exactly only up to rounding.
        CHECK(response(ResponseSpec::count_uniform(1, 5, 1.0 / 3.0), 2, 3, 6, 6) == 1.0);
    }
    SUBCASE("Gaussian threshold at its mean") {
        const auto spec = ResponseSpec::distributed(ThresholdLaw::fixed(1.0), ThresholdLaw::gaussian(5.0, 0.1), 0.0,
                                                    PressureScale::Count);
        CHECK(response(spec, 2, 5, 0, 9) == doctest::Approx(0.5));
    }
    SUBCASE("isolated nodes never respond") {
        CHECK(response(ResponseSpec::fraction_uniform(0.0, 0.0, 1.0), 1, 0, 0, 0) == 0.0);
    }
    SUBCASE("invalid stage") { CHECK_THROWS_AS(response(ResponseSpec::fraction_uniform(0.1, 0.2, 0), 3, 0, 0, 1), ConfigError); }
    SUBCASE("F1 >= F2 everywhere, both monotone in m1 and m2") {
        const auto spec = ResponseSpec::distributed(ThresholdLaw::fixed(0.3), ThresholdLaw::gaussian(0.8, 0.2), 1.5);
        for (std::size_t k = 1; k <= 12; ++k)
            for (std::size_t m1 = 0; m1 <= k; ++m1)
                for (std::size_t m2 = 0; m2 <= m1; ++m2) {
                    CHECK(response(spec, 1, m1, m2, k) >= response(spec, 2, m1, m2, k));
                    if (m1 < k) CHECK(response(spec, 2, m1 + 1, m2, k) >= response(spec, 2, m1, m2, k));
                    if (m2 < m1) CHECK(response(spec, 2, m1, m2 + 1, k) >= response(spec, 2, m1, m2, k));
                }
    }
    SUBCASE("matches the direct threshold rule") {
        std::mt19937_64 rng(4);
        for (int t = 0; t < 200; ++t) {
            oracle::Rule rule;
            rule.beta = std::uniform_real_distribution<double>(0, 2)(rng);
            rule.r1 = std::uniform_real_distribution<double>(0, 1)(rng);
            rule.r2 = rule.r1 + std::uniform_real_distribution<double>(0, 1)(rng);
            const auto spec = ResponseSpec::fraction_uniform(rule.r1, rule.r2, rule.beta);
            const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
            const std::size_t m1 = std::uniform_int_distribution<std::size_t>(0, k)(rng);
            const std::size_t m2 = std::uniform_int_distribution<std::size_t>(0, m1)(rng);
            CHECK(response(spec, 1, m1, m2, k) == rule.f(1, m1, m2, k));
            CHECK(response(spec, 2, m1, m2, k) == rule.f(2, m1, m2, k));
        }
    }
}

TEST_CASE("response validation") {
    CHECK_THROWS_AS(ResponseSpec::fraction_uniform(0.5, 0.3, 1.0).validate(), ConfigError);
    CHECK_THROWS_AS(ResponseSpec::fraction_uniform(0.2, 0.3, -1.0).validate(), ConfigError);
    CHECK_THROWS_AS(ResponseSpec::distributed(ThresholdLaw::fixed(0.2), ThresholdLaw::gaussian(0.8, 0.0), 1.0).validate(),
                    ConfigError);
    CHECK_NOTHROW(ResponseSpec::fraction_uniform(0.2, kInfiniteThreshold, 0.0).validate());
}

TEST_CASE("seeds") {
    std::mt19937_64 rng(1);
    SUBCASE("348 seeds on 17420 nodes, S2 inside S1") {
        const auto s = draw_seeds(17420, 0.02, 0.02, rng);
        CHECK(s.s1.size() == 348);
        CHECK(s.s2.size() == 348);
        for (NodeId v : s.s2) CHECK(std::find(s.s1.begin(), s.s1.end(), v) != s.s1.end());
    }
    SUBCASE("everyone S1") {
        const auto s = draw_seeds(100, 1.0, 0.0, rng);
        CHECK(s.s1.size() == 100);
        CHECK(s.s2.empty());
    }
    SUBCASE("10 seeds at 1e-3 of 1e4") { CHECK(draw_seeds(10000, 1e-3, 0.0, rng).s1.size() == 10); }
    SUBCASE("ties round to even") {
        CHECK(seed_count(0.1, 25) == 2);
        CHECK(seed_count(0.14, 25) == 4);
    }
    SUBCASE("more S2 than S1 seeds") { CHECK_THROWS_AS(draw_seeds(100, 0.01, 0.02, rng), ConfigError); }
}

TEST_CASE("node updates") {
    SUBCASE("direct S0 -> S2 jump") {
        // Star: centre 0 of degree 4, leaves all S2.
        const Graph g = Graph::from_edges(5, std::vector<Edge>{{0, 1}, {0, 2}, {0, 3}, {0, 4}});
        const auto spec = ResponseSpec::fraction_uniform(0.2, 0.7, 0.45);
        SimState s(g, spec, {std::vector<double>(5, 0.2), std::vector<double>(5, 0.7)});
        s.seed(explicit_seeds({1, 2, 3, 4}, {1, 2, 3, 4}));
        const auto change = s.update_node(0);
        REQUIRE(change);
        CHECK(change->from == Stage::S0);
        CHECK(change->to == Stage::S2);
    }
    SUBCASE("S2 nodes never change; isolated nodes stay S0") {
        const Graph g = Graph::from_edges(3, std::vector<Edge>{{0, 1}});
        SimState s(g, ResponseSpec::fraction_uniform(0.0, 0.0, 1.0), {std::vector<double>(3, 0.0), std::vector<double>(3, 0.0)});
        s.seed(explicit_seeds({0}, {0}));
        CHECK_FALSE(s.update_node(0));
        CHECK_FALSE(s.update_node(2));
        CHECK(s.stage(2) == Stage::S0);
    }
}

TEST_CASE("fixpoint oracle examples") {
    SUBCASE("K4 with one S2 seed becomes all S2") {
        const Graph g = Graph::from_edges(4, std::vector<Edge>{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
        const auto spec = ResponseSpec::fraction_uniform(1.0 / 3.0, 2.0 / 3.0, 1.0);
        const auto out = final_state_oracle(g, spec, {std::vector<double>(4, 1.0 / 3.0), std::vector<double>(4, 2.0 / 3.0)},
                                            explicit_seeds({0}, {0}));
        for (Stage x : out) CHECK(x == Stage::S2);
    }
    SUBCASE("path with a high threshold stays at the seeds") {
        const Graph g = Graph::from_edges(3, std::vector<Edge>{{0, 1}, {1, 2}});
        const auto spec = ResponseSpec::fraction_uniform(0.6, 0.9, 0.0);
        const auto out = final_state_oracle(g, spec, {std::vector<double>(3, 0.6), std::vector<double>(3, 0.9)},
                                            explicit_seeds({0}, {}));
        CHECK(as_ints(out) == std::vector<int>{1, 0, 0});
    }
    SUBCASE("no seeds, no activity") {
        const Graph g = generate_er(3.0, 40, 2);
        const auto spec = ResponseSpec::fraction_uniform(0.1, 0.2, 1.0);
        std::mt19937_64 rng(1);
        const auto out = final_state_oracle(g, spec, NodeThresholds::sample(spec, 40, rng), explicit_seeds({}, {}));
        for (Stage x : out) CHECK(x == Stage::S0);
    }
}

TEST_CASE("asynchronous finals match both oracles under random orderings") {
    std::mt19937_64 rng(20240601);
    for (int trial = 0; trial < 40; ++trial) {
        const Graph g = random_small_graph(rng);
        const std::size_t n = g.node_count();
        oracle::Rule rule;
        rule.beta = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
        const auto spec = ResponseSpec::fraction_uniform(0.0, 0.0, rule.beta);
        NodeThresholds th;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t v = 0; v < n; ++v) {
            th.r1.push_back(u(rng));
            th.r2.push_back(th.r1.back() + u(rng));
        }
        const auto seeds = draw_seeds(n, u(rng) * 0.3, 0.0, rng);
        SeedSets s = seeds;
        s.s2.assign(s.s1.begin(), s.s1.begin() + static_cast<std::ptrdiff_t>(s.s1.size() / 2));

        const auto expected = final_state_oracle(g, spec, th, s);
        std::vector<int> start(n, 0);
        for (NodeId v : s.s1) start[v] = 1;
        for (NodeId v : s.s2) start[v] = 2;
        CHECK(as_ints(expected) == oracle::final_stages(adjacency(g), rule, th.r1, th.r2, start));

        for (int order = 0; order < 5; ++order) {
            SimState st(g, spec, th);
            st.seed(s);
            std::mt19937_64 orng(static_cast<std::uint64_t>(trial * 100 + order));
            while (!st.at_fixpoint()) st.step_async(orng);
            CHECK(st.stages() == expected);
            CHECK(st.caches_consistent());
        }
        SimState sync(g, spec, th);
        sync.seed(s);
        while (!sync.at_fixpoint()) sync.step_sync();
        CHECK(sync.stages() == expected);
    }
}

TEST_CASE("neighbor caches stay consistent during a run") {
    const Graph g = generate_er(4.0, 300, 3);
    const auto spec = ResponseSpec::distributed(ThresholdLaw::fixed(0.25), ThresholdLaw::gaussian(0.6, 0.2), 1.0);
    std::mt19937_64 rng(5);
    SimState s(g, spec, NodeThresholds::sample(spec, 300, rng));
    s.seed(draw_seeds(300, 0.05, 0.02, rng));
    for (int i = 0; i < 3000 && !s.at_fixpoint(); ++i) {
        s.step_async(rng);
        if (i % 250 == 0) REQUIRE(s.caches_consistent());
    }
    CHECK(s.caches_consistent());
}

TEST_CASE("ensemble runs") {
    const auto spec = ResponseSpec::count_uniform(1, 5, 0.3);
    const auto g = generate_config_model(DegreeDistribution::from_weights({{4, 1}, {5, 2}}), 2000, 1);
    SimConfig cfg;
    cfg.phi1 = 0.005;
    cfg.realizations = 6;
    cfg.t_max = 30;
    cfg.grid_points = 31;
    SUBCASE("thread count does not change the result") {
        cfg.threads = 1;
        const auto a = run(g, spec, cfg);
        cfg.threads = 3;
        const auto b = run(g, spec, cfg);
        CHECK(a.rho1 == b.rho1);
        CHECK(a.rho2_k == b.rho2_k);
    }
    SUBCASE("densities are monotone, bounded and nested") {
        const auto ts = run(g, spec, cfg);
        REQUIRE(ts.size() == 31);
        for (std::size_t j = 0; j < ts.size(); ++j) {
            CHECK(ts.rho2[j] <= ts.rho1[j] + 1e-15);
            CHECK(ts.rho1[j] <= 1.0);
            if (j) CHECK(ts.rho1[j] >= ts.rho1[j - 1]);
        }
        CHECK(ts.rho1.front() == doctest::Approx(0.005));
    }
    SUBCASE("no seeds gives an all-zero series") {
        cfg.phi1 = 0.0;
        const auto ts = run(g, spec, cfg);
        for (double v : ts.rho1) CHECK(v == 0.0);
    }
    SUBCASE("synchronous and asynchronous finals agree for quenched thresholds") {
        cfg.seed_policy = SeedPolicy::Fixed;
        cfg.realizations = 1;
        const auto a = run(g, spec, cfg);
        cfg.mode = UpdateMode::Synchronous;
        const auto b = run(g, spec, cfg);
        CHECK(a.final_rho1 == b.final_rho1);
        CHECK(a.final_rho2 == b.final_rho2);
    }
    SUBCASE("invalid config") {
        cfg.phi2 = 0.01;
        CHECK_THROWS_AS(run(g, spec, cfg), ConfigError);
    }
}
