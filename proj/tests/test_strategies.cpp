#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fedsim/strategies.hpp"

using namespace fedsim;

namespace {

ServerState tiny_state(StrategyKind kind, std::vector<double> w = {0.0, 0.0}) {
    ParamVector p;
    p.layer_sizes = {1, 2};
    p.values = std::move(w);
    StrategyConfig cfg;
    cfg.kind = kind;
    return make_server_state(std::move(p), cfg);
}

ClientUpdate upd(int id, std::vector<double> delta, std::uint64_t n) {
    ClientUpdate u;
    u.client_id = id;
    u.delta = std::move(delta);
    u.n = n;
    return u;
}

}  // namespace

TEST_CASE("strategy names round-trip") {
    for (StrategyKind k : {StrategyKind::FedAvg, StrategyKind::FedAvgM, StrategyKind::FedProx,
                           StrategyKind::FedAdam})
        CHECK(parse_strategy(strategy_name(k)) == k);
    CHECK_THROWS_AS(parse_strategy("sgd"), std::invalid_argument);
}

TEST_CASE("aggregate_deltas weighting") {
    // single client: identity
    const auto one = aggregate_deltas({upd(0, {1.0, -2.0}, 500)});
    CHECK(one == std::vector<double>{1.0, -2.0});

    // equal n: plain mean, order-independent
    const auto a = aggregate_deltas({upd(0, {2.0, 0.0}, 10), upd(1, {0.0, 4.0}, 10)});
    const auto b = aggregate_deltas({upd(1, {0.0, 4.0}, 10), upd(0, {2.0, 0.0}, 10)});
    CHECK(a == std::vector<double>{1.0, 2.0});
    CHECK(a == b);

    // weights proportional to n: (3/4)*4 + (1/4)*0 = 3
    const auto w = aggregate_deltas({upd(0, {4.0}, 3), upd(1, {0.0}, 1)});
    CHECK(w[0] == doctest::Approx(3.0).epsilon(1e-15));

    // errors
    CHECK_THROWS_AS(aggregate_deltas({}), std::invalid_argument);
    CHECK_THROWS_AS(aggregate_deltas({upd(0, {1.0}, 0)}), std::invalid_argument);
    CHECK_THROWS_AS(aggregate_deltas({upd(0, {1.0}, 4), upd(1, {1.0, 2.0}, 4)}),
                    std::invalid_argument);
}

TEST_CASE("aggregate_deltas coordinates stay within the participant envelope") {
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ClientUpdate> ups;
        const int k = static_cast<int>(rng.uniform_int(1, 6));
        for (int i = 0; i < k; ++i) {
            std::vector<double> d(4);
            for (double& x : d) x = rng.uniform(-5.0, 5.0);
            ups.push_back(upd(i, d, rng.uniform_int(1, 10000)));
        }
        const auto avg = aggregate_deltas(ups);
        for (std::size_t j = 0; j < avg.size(); ++j) {
            double lo = ups[0].delta[j], hi = ups[0].delta[j];
            for (const auto& u : ups) {
                lo = std::min(lo, u.delta[j]);
                hi = std::max(hi, u.delta[j]);
            }
            CHECK(avg[j] >= lo - 1e-12);
            CHECK(avg[j] <= hi + 1e-12);
        }
    }
}

TEST_CASE("fedavg adds the delta") {
    ServerState s = tiny_state(StrategyKind::FedAvg, {1.0, -1.0});
    fedavg_update(s, {0.5, 0.25});
    CHECK(s.weights.values == std::vector<double>{1.5, -0.75});
}

TEST_CASE("fedavgm server momentum unroll") {
    ServerState s = tiny_state(StrategyKind::FedAvgM);
    REQUIRE(s.v_momentum.size() == 2);
    fedavgm_update(s, {1.0, 2.0}, 0.8);
    CHECK(s.weights.values == std::vector<double>{1.0, 2.0});  // v = delta on first round
    fedavgm_update(s, {1.0, 0.0}, 0.8);
    // v = 0.8*{1,2} + {1,0} = {1.8, 1.6}; W = {2.8, 3.6}
    CHECK(s.weights.values[0] == doctest::Approx(2.8).epsilon(1e-15));
    CHECK(s.weights.values[1] == doctest::Approx(3.6).epsilon(1e-15));
}

TEST_CASE("fedprox server step equals fedavg") {
    ServerState a = tiny_state(StrategyKind::FedProx, {0.5, 0.5});
    ServerState b = tiny_state(StrategyKind::FedAvg, {0.5, 0.5});
    fedprox_update(a, {0.1, -0.2});
    fedavg_update(b, {0.1, -0.2});
    CHECK(a.weights.values == b.weights.values);
}

TEST_CASE("fedadam first step and bounds") {
    ServerState s = tiny_state(StrategyKind::FedAdam);
    REQUIRE(s.adam_m.size() == 2);
    REQUIRE(s.adam_v.size() == 2);
    fedadam_update(s, {0.3, -4.0}, 0.9, 0.99, 0.1, 1e-9);
    // from zero buffers: m = 0.1*d, v = 0.01*d^2, so step = eta*0.1*d/(0.1*|d|+tau)
    // = eta * sign(d), independent of |d|.
    CHECK(std::abs(s.weights.values[0] - 0.1) < 1e-8);
    CHECK(std::abs(s.weights.values[1] + 0.1) < 1e-8);
    for (double v : s.adam_v) CHECK(v >= 0.0);

    // every step is bounded by eta * |m| / (sqrt(v) + tau)
    Rng rng(31);
    for (int t = 0; t < 50; ++t) {
        const std::vector<double> before = s.weights.values;
        std::vector<double> d{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        fedadam_update(s, d, 0.9, 0.99, 0.1, 1e-9);
        for (std::size_t j = 0; j < 2; ++j) {
            const double bound = 0.1 * std::abs(s.adam_m[j]) / (std::sqrt(s.adam_v[j]) + 1e-9);
            CHECK(std::abs(s.weights.values[j] - before[j]) <= bound + 1e-15);
            CHECK(s.adam_v[j] >= 0.0);
        }
    }
}

TEST_CASE("fedavgm with beta = 0 is bitwise fedavg") {
    Rng rng(41);
    ParamVector p;
    p.layer_sizes = {1, 8};
    for (int j = 0; j < 8; ++j) p.values.push_back(rng.uniform(-1.0, 1.0));

    StrategyConfig avg_cfg;
    avg_cfg.kind = StrategyKind::FedAvg;
    StrategyConfig m_cfg;
    m_cfg.kind = StrategyKind::FedAvgM;
    m_cfg.beta = 0.0;

    ServerState a = make_server_state(p, avg_cfg);
    ServerState b = make_server_state(p, m_cfg);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> d(8);
        for (double& x : d) x = rng.uniform(-0.3, 0.3);
        apply_strategy_update(a, d, avg_cfg);
        apply_strategy_update(b, d, m_cfg);
        CHECK(a.weights.values == b.weights.values);
    }
    CHECK(a.round == 20);
    CHECK(b.round == 20);
}

TEST_CASE("strategy config validation") {
    StrategyConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.beta = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = StrategyConfig{};
    cfg.mu = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = StrategyConfig{};
    cfg.tau = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = StrategyConfig{};
    cfg.kind = StrategyKind::FedProx;
    CHECK(cfg.client_proximal_mu() == doctest::Approx(0.3));
    cfg.kind = StrategyKind::FedAvg;
    CHECK(cfg.client_proximal_mu() == 0.0);
}
