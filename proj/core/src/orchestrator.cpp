#include "fedsim/orchestrator.hpp"

#include <algorithm>
#include <future>
#include <numeric>
#include <stdexcept>

namespace fedsim {

void ExperimentConfig::validate() const {
    if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
    if (num_clients < 1) throw std::invalid_argument("num_clients must be >= 1");
    if (first_round_participants < 1 || first_round_participants > num_clients)
        throw std::invalid_argument("first_round_participants out of range");
    if (later_round_participants < 1 || later_round_participants > num_clients)
        throw std::invalid_argument("later_round_participants out of range");
    if (local.epochs < 1) throw std::invalid_argument("local epochs must be >= 1");
    strategy.validate();
    data.validate();
}

Batch to_batch(const std::vector<Example>& examples) {
    Batch b;
    b.width = kNumMetrics;
    b.rows = static_cast<int>(examples.size());
    b.x.reserve(examples.size() * kNumMetrics);
    b.y.reserve(examples.size());
    for (const auto& ex : examples) {
        b.x.insert(b.x.end(), ex.x.begin(), ex.x.end());
        b.y.push_back(ex.y);
    }
    return b;
}

std::vector<PreparedClient> prepare_clients(const std::vector<ClientDataset>& clients) {
    std::vector<PreparedClient> out;
    out.reserve(clients.size());
    for (const auto& c : clients) {
        PreparedClient pc;
        pc.client_id = c.client_id;
        pc.train = to_batch(c.train);
        pc.val = to_batch(c.val);
        pc.test = to_batch(c.test);
        out.push_back(std::move(pc));
    }
    return out;
}

std::vector<int> sample_participants(Rng& rng, int round_index, const ExperimentConfig& config) {
    if (round_index < 1 || round_index > config.rounds)
        throw std::invalid_argument("round index out of range");
    const int k = round_index == 1 ? config.first_round_participants
                                   : config.later_round_participants;
    std::vector<int> ids(static_cast<std::size_t>(config.num_clients));
    std::iota(ids.begin(), ids.end(), 0);
    // Partial Fisher-Yates: the first k entries are the sample.
    for (int i = 0; i < k; ++i) {
        const auto j = static_cast<std::size_t>(
            rng.uniform_int(i, config.num_clients - 1));
        std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
    }
    ids.resize(static_cast<std::size_t>(k));
    std::sort(ids.begin(), ids.end());
    return ids;
}

double weighted_accuracy(const std::vector<ClientEval>& evals) {
    if (evals.empty()) throw std::invalid_argument("weighted_accuracy: no clients");
    double num = 0.0, den = 0.0;
    for (const auto& e : evals) {
        if (e.test_size < 1) throw std::invalid_argument("weighted_accuracy: empty test split");
        num += e.test_accuracy * static_cast<double>(e.test_size);
        den += static_cast<double>(e.test_size);
    }
    return num / den;
}

double weighted_loss(const std::vector<ClientEval>& evals) {
    if (evals.empty()) throw std::invalid_argument("weighted_loss: no clients");
    double num = 0.0, den = 0.0;
    for (const auto& e : evals) {
        num += e.test_loss * static_cast<double>(e.test_size);
        den += static_cast<double>(e.test_size);
    }
    return num / den;
}

RoundMetrics run_round(ServerState& state, const std::vector<PreparedClient>& clients,
                       const std::vector<int>& participants, const ExperimentConfig& config) {
    if (participants.empty()) throw std::invalid_argument("run_round: no participants");

    const int round_index = state.round + 1;  // rounds are 1-indexed
    LocalTrainSpec spec = config.local;
    spec.proximal_mu = config.strategy.client_proximal_mu();

    // Each participant trains on an independent derived RNG stream, so the
    // result is identical whether clients run sequentially or concurrently.
    std::vector<std::future<ClientUpdate>> futures;
    futures.reserve(participants.size());
    for (int cid : participants) {
        futures.push_back(std::async(std::launch::async, [&, cid]() {
            const PreparedClient& client = clients.at(static_cast<std::size_t>(cid));
            Rng rng(mix_seed(config.seed, kStreamLocalTrain + static_cast<std::uint64_t>(round_index),
                             static_cast<std::uint64_t>(cid)));
            LocalTrainResult res = local_train(state.weights, client.train, spec, config.sgd, rng);
            ClientUpdate update;
            update.client_id = cid;
            update.n = static_cast<std::uint64_t>(client.train.rows);
            update.delta.resize(res.weights.values.size());
            for (std::size_t j = 0; j < update.delta.size(); ++j)
                update.delta[j] = res.weights.values[j] - state.weights.values[j];
            return update;
        }));
    }

    std::vector<ClientUpdate> updates;
    updates.reserve(futures.size());
    for (auto& f : futures) updates.push_back(f.get());
    // participants is sorted, and futures preserve that order; aggregation
    // order is therefore fixed by client_id.

    // Round delta per Algorithm 1: p_i = n_i / N with N the total training
    // examples across ALL clients, i.e. the participant-normalized average
    // scaled by (participant examples / N).
    std::vector<double> delta = aggregate_deltas(updates);
    double n_total = 0.0, n_participants = 0.0;
    for (const auto& c : clients) n_total += static_cast<double>(c.train.rows);
    for (const auto& u : updates) n_participants += static_cast<double>(u.n);
    const double scale = n_participants / n_total;
    for (double& d : delta) d *= scale;
    apply_strategy_update(state, delta, config.strategy);

    RoundMetrics metrics;
    metrics.round = round_index;
    metrics.participants = participants;
    metrics.per_client.resize(clients.size());
    std::vector<std::future<void>> eval_futures;
    eval_futures.reserve(clients.size());
    for (std::size_t i = 0; i < clients.size(); ++i) {
        eval_futures.push_back(std::async(std::launch::async, [&, i]() {
            const EvalResult r = evaluate(state.weights, clients[i].test);
            metrics.per_client[i] = ClientEval{clients[i].client_id, r.accuracy, r.loss,
                                               static_cast<std::size_t>(clients[i].test.rows)};
        }));
    }
    for (auto& f : eval_futures) f.get();
    metrics.weighted_accuracy = weighted_accuracy(metrics.per_client);
    metrics.weighted_loss = weighted_loss(metrics.per_client);
    return metrics;
}

std::vector<RoundMetrics> run_experiment(const ExperimentConfig& config,
                                         const std::vector<PreparedClient>& clients,
                                         ParamVector* final_weights) {
    config.validate();
    if (clients.size() != static_cast<std::size_t>(config.num_clients))
        throw std::invalid_argument("run_experiment: client count mismatch");

    Rng init_rng(mix_seed(config.seed, kStreamModelInit));
    ServerState state = make_server_state(init_model(init_rng, config.model), config.strategy);
    Rng participation_rng(mix_seed(config.seed, kStreamParticipation));

    std::vector<RoundMetrics> all;
    all.reserve(static_cast<std::size_t>(config.rounds));
    for (int t = 1; t <= config.rounds; ++t) {
        const std::vector<int> parts = sample_participants(participation_rng, t, config);
        all.push_back(run_round(state, clients, parts, config));
    }
    if (final_weights != nullptr) *final_weights = state.weights;
    return all;
}

std::vector<RoundMetrics> run_experiment(const ExperimentConfig& config,
                                         ParamVector* final_weights) {
    const auto datasets = generate_all_clients(config.data, builtin_hormone_table());
    return run_experiment(config, prepare_clients(datasets), final_weights);
}

}  // namespace fedsim
