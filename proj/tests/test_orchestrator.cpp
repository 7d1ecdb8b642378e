#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fedsim/orchestrator.hpp"

using namespace fedsim;

namespace {

// Small but real experiment; fast enough to run inside the unit suite.
ExperimentConfig small_config(std::uint64_t seed = 9) {
    ExperimentConfig cfg;
    cfg.rounds = 3;
    cfg.num_clients = 4;
    cfg.first_round_participants = 2;
    cfg.later_round_participants = 3;
    cfg.data.num_clients = 4;
    cfg.data.fixed_train_size = 256;
    cfg.data.seed = seed;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("sample_participants: counts, distinctness, determinism") {
    ExperimentConfig cfg;
    cfg.rounds = 8;

    Rng a(mix_seed(3, kStreamParticipation));
    Rng b(mix_seed(3, kStreamParticipation));
    for (int t = 1; t <= 8; ++t) {
        const auto p = sample_participants(a, t, cfg);
        const auto q = sample_participants(b, t, cfg);
        CHECK(p == q);
        CHECK(p.size() == (t == 1 ? 2u : 6u));
        CHECK(std::is_sorted(p.begin(), p.end()));
        CHECK(std::set<int>(p.begin(), p.end()).size() == p.size());
        for (int cid : p) {
            CHECK(cid >= 0);
            CHECK(cid < 12);
        }
    }
    CHECK_THROWS_AS(sample_participants(a, 0, cfg), std::invalid_argument);
    CHECK_THROWS_AS(sample_participants(a, 9, cfg), std::invalid_argument);
}

TEST_CASE("sample_participants covers all clients over many rounds") {
    ExperimentConfig cfg;
    cfg.rounds = 1000;
    Rng rng(mix_seed(17, kStreamParticipation));
    std::set<int> seen;
    for (int t = 1; t <= 200; ++t)
        for (int cid : sample_participants(rng, t, cfg)) seen.insert(cid);
    CHECK(seen.size() == 12);
}

TEST_CASE("weighted metrics") {
    std::vector<ClientEval> evals{
        {0, 1.0, 0.0, 100},
        {1, 0.0, 2.0, 300},
    };
    CHECK(weighted_accuracy(evals) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(weighted_loss(evals) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK_THROWS_AS(weighted_accuracy({}), std::invalid_argument);
    CHECK_THROWS_AS(weighted_accuracy({ClientEval{0, 0.5, 0.1, 0}}), std::invalid_argument);
}

TEST_CASE("run_round with lr = 0 leaves the global model unchanged") {
    ExperimentConfig cfg = small_config();
    cfg.sgd.lr = 0.0;
    const auto datasets = generate_all_clients(cfg.data, builtin_hormone_table());
    const auto clients = prepare_clients(datasets);

    Rng init_rng(mix_seed(cfg.seed, kStreamModelInit));
    ServerState state = make_server_state(init_model(init_rng, cfg.model), cfg.strategy);
    const std::vector<double> before = state.weights.values;
    run_round(state, clients, {0, 2}, cfg);
    CHECK(state.weights.values == before);
    CHECK(state.round == 1);
}

TEST_CASE("run_experiment is deterministic and internally consistent") {
    const ExperimentConfig cfg = small_config();
    ParamVector w1, w2;
    const auto m1 = run_experiment(cfg, &w1);
    const auto m2 = run_experiment(cfg, &w2);

    REQUIRE(m1.size() == 3);
    CHECK(w1.values == w2.values);
    for (std::size_t t = 0; t < m1.size(); ++t) {
        CHECK(m1[t].round == static_cast<int>(t) + 1);
        CHECK(m1[t].weighted_accuracy == m2[t].weighted_accuracy);
        CHECK(m1[t].weighted_loss == m2[t].weighted_loss);
        CHECK(m1[t].participants == m2[t].participants);

        // weighted metrics match a recompute from per-client rows
        CHECK(std::abs(m1[t].weighted_accuracy - weighted_accuracy(m1[t].per_client)) < 1e-9);
        CHECK(std::abs(m1[t].weighted_loss - weighted_loss(m1[t].per_client)) < 1e-9);
        CHECK(m1[t].per_client.size() == 4);
        CHECK(m1[t].weighted_accuracy >= 0.0);
        CHECK(m1[t].weighted_accuracy <= 1.0);
    }
    CHECK(m1[0].participants.size() == 2);
    CHECK(m1[1].participants.size() == 3);
}

TEST_CASE("run_experiment over prepared clients equals the generating overload") {
    const ExperimentConfig cfg = small_config(21);
    const auto datasets = generate_all_clients(cfg.data, builtin_hormone_table());
    const auto direct = run_experiment(cfg, prepare_clients(datasets));
    const auto generated = run_experiment(cfg);
    REQUIRE(direct.size() == generated.size());
    for (std::size_t t = 0; t < direct.size(); ++t) {
        CHECK(direct[t].weighted_accuracy == generated[t].weighted_accuracy);
        CHECK(direct[t].weighted_loss == generated[t].weighted_loss);
    }
}

TEST_CASE("config validation rejects bad shapes") {
    ExperimentConfig cfg = small_config();
    cfg.first_round_participants = 5;  // > num_clients
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.rounds = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    const auto datasets = generate_all_clients(cfg.data, builtin_hormone_table());
    auto clients = prepare_clients(datasets);
    clients.pop_back();
    CHECK_THROWS_AS(run_experiment(cfg, clients), std::invalid_argument);
}
