#include <benchmark/benchmark.h>

#include "fedsim/orchestrator.hpp"

using namespace fedsim;

namespace {

Batch make_batch(int rows) {
    Rng rng(1);
    Batch b;
    b.width = kNumMetrics;
    b.rows = rows;
    for (int i = 0; i < rows * b.width; ++i) b.x.push_back(rng.uniform(-0.5, 0.5));
    for (int i = 0; i < rows; ++i) b.y.push_back(static_cast<int>(rng.uniform_int(0, 4)));
    return b;
}

void BM_Forward(benchmark::State& state) {
    const Batch batch = make_batch(static_cast<int>(state.range(0)));
    Rng rng(2);
    const ParamVector params = init_model(rng, MlpConfig{});
    for (auto _ : state) benchmark::DoNotOptimize(forward(params, batch));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(256)->Arg(3125);

void BM_Backward(benchmark::State& state) {
    const Batch batch = make_batch(static_cast<int>(state.range(0)));
    Rng rng(2);
    const ParamVector params = init_model(rng, MlpConfig{});
    for (auto _ : state) benchmark::DoNotOptimize(backward(params, batch));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Backward)->Arg(32)->Arg(256);

void BM_LocalTrainEpoch(benchmark::State& state) {
    const Batch batch = make_batch(static_cast<int>(state.range(0)));
    Rng init_rng(3);
    const ParamVector w0 = init_model(init_rng, MlpConfig{});
    LocalTrainSpec spec;
    spec.epochs = 1;
    const SgdHyper hyper;
    for (auto _ : state) {
        Rng rng(4);
        benchmark::DoNotOptimize(local_train(w0, batch, spec, hyper, rng));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LocalTrainEpoch)->Arg(256)->Arg(2048);

void BM_GenerateClientDataset(benchmark::State& state) {
    DataGenConfig cfg;
    cfg.fixed_train_size = static_cast<int>(state.range(0));
    const std::vector<double> prior(5, 0.2);
    for (auto _ : state) {
        Rng rng(5);
        benchmark::DoNotOptimize(
            generate_client_dataset(rng, cfg, 0, prior, builtin_hormone_table()));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateClientDataset)->Arg(1000)->Arg(12500);

void BM_AggregateDeltas(benchmark::State& state) {
    Rng rng(6);
    std::vector<ClientUpdate> updates;
    for (int i = 0; i < 6; ++i) {
        ClientUpdate u;
        u.client_id = i;
        u.n = 12500;
        u.delta.resize(param_count({7, 16, 16, 5}));
        for (double& d : u.delta) d = rng.uniform(-0.1, 0.1);
        updates.push_back(std::move(u));
    }
    for (auto _ : state) benchmark::DoNotOptimize(aggregate_deltas(updates));
}
BENCHMARK(BM_AggregateDeltas);

void BM_FullRound(benchmark::State& state) {
    ExperimentConfig cfg;
    cfg.num_clients = 4;
    cfg.first_round_participants = 2;
    cfg.later_round_participants = 3;
    cfg.data.num_clients = 4;
    cfg.data.fixed_train_size = 1024;
    cfg.data.seed = 7;
    cfg.seed = 7;
    const auto clients =
        prepare_clients(generate_all_clients(cfg.data, builtin_hormone_table()));
    Rng init_rng(mix_seed(cfg.seed, kStreamModelInit));
    const ParamVector w0 = init_model(init_rng, cfg.model);
    for (auto _ : state) {
        ServerState server = make_server_state(w0, cfg.strategy);
        benchmark::DoNotOptimize(run_round(server, clients, {0, 1, 2}, cfg));
    }
}
BENCHMARK(BM_FullRound)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
