#pragma once

#include <cstdint>
#include <vector>

#include "fedsim/data_synth.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/strategies.hpp"

namespace fedsim {

// Accuracy of assigning one of the 5 OCPs uniformly at random; the reference
// line for convergence plots.
inline constexpr double kRandomBaselineAccuracy = 0.2;

// Stream tags for deriving child RNGs from the experiment seed. Local
// training streams use mix_seed(seed, kStreamLocalTrain + round, client_id),
// so they are identical in-process and across processes.
inline constexpr std::uint64_t kStreamModelInit = 1;
inline constexpr std::uint64_t kStreamParticipation = 2;
inline constexpr std::uint64_t kStreamLocalTrain = 1000;

struct ExperimentConfig {
    int rounds = 8;
    int num_clients = 12;
    int first_round_participants = 2;
    int later_round_participants = 6;
    LocalTrainSpec local;   // epochs (proximal_mu is derived from strategy)
    SgdHyper sgd;           // lr, momentum, batch size
    MlpConfig model;
    StrategyConfig strategy;
    DataGenConfig data;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ClientEval {
    int client_id = 0;
    double test_accuracy = 0.0;
    double test_loss = 0.0;
    std::size_t test_size = 0;
};

struct RoundMetrics {
    int round = 0;  // 1-indexed
    double weighted_accuracy = 0.0;
    double weighted_loss = 0.0;
    std::vector<ClientEval> per_client;
    std::vector<int> participants;
};

// Model-space view of one client, flattened for training.
struct PreparedClient {
    int client_id = 0;
    Batch train, val, test;
};

Batch to_batch(const std::vector<Example>& examples);
std::vector<PreparedClient> prepare_clients(const std::vector<ClientDataset>& clients);

// Round 1 draws first_round_participants distinct clients, later rounds
// later_round_participants, uniformly without replacement. Returned sorted.
std::vector<int> sample_participants(Rng& rng, int round_index, const ExperimentConfig& config);

double weighted_accuracy(const std::vector<ClientEval>& evals);
double weighted_loss(const std::vector<ClientEval>& evals);

// One communication round: participants train locally from the broadcast
// weights (concurrently; aggregation ordered by client_id), the server
// aggregates and applies its strategy update, then the new global model is
// evaluated on every client's test split.
RoundMetrics run_round(ServerState& state, const std::vector<PreparedClient>& clients,
                       const std::vector<int>& participants, const ExperimentConfig& config);

// Full experiment over pre-generated data.
std::vector<RoundMetrics> run_experiment(const ExperimentConfig& config,
                                         const std::vector<PreparedClient>& clients,
                                         ParamVector* final_weights = nullptr);

// Generates the datasets from config.data and runs the experiment.
std::vector<RoundMetrics> run_experiment(const ExperimentConfig& config,
                                         ParamVector* final_weights = nullptr);

}  // namespace fedsim
