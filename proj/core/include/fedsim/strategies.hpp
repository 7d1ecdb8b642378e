#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/nn.hpp"

namespace fedsim {

enum class StrategyKind { FedAvg, FedAvgM, FedProx, FedAdam };

std::string strategy_name(StrategyKind kind);
StrategyKind parse_strategy(const std::string& name);  // throws on unknown name

struct StrategyConfig {
    StrategyKind kind = StrategyKind::FedAvg;
    double beta = 0.8;    // FedAvgM server momentum
    double mu = 0.3;      // FedProx proximal coefficient (client-side loss)
    double beta1 = 0.9;   // FedAdam
    double beta2 = 0.99;  // FedAdam
    double eta = 0.1;     // FedAdam server step size
    double tau = 1e-9;    // FedAdam denominator offset

    void validate() const;

    // The proximal coefficient applied during local training; only FedProx
    // carries the term.
    double client_proximal_mu() const { return kind == StrategyKind::FedProx ? mu : 0.0; }
};

struct ClientUpdate {
    int client_id = 0;
    std::vector<double> delta;  // w_opt - W, flat
    std::uint64_t n = 0;        // local training-example count
};

struct ServerState {
    ParamVector weights;               // the global model W
    std::vector<double> v_momentum;    // FedAvgM buffer
    std::vector<double> adam_m;        // FedAdam first moment
    std::vector<double> adam_v;        // FedAdam second moment
    int round = 0;
};

ServerState make_server_state(ParamVector initial_weights, const StrategyConfig& config);

// Weighted average of the client deltas, p_i = n_i / sum_j n_j over the
// round's participants.
std::vector<double> aggregate_deltas(const std::vector<ClientUpdate>& updates);

// W <- W + delta
void fedavg_update(ServerState& state, const std::vector<double>& delta);
// v <- beta*v + delta; W <- W + v
void fedavgm_update(ServerState& state, const std::vector<double>& delta, double beta);
// Server side identical to FedAvg; the mu term lives in the client loss.
void fedprox_update(ServerState& state, const std::vector<double>& delta);
// m <- b1*m + (1-b1)*delta; v <- b2*v + (1-b2)*delta^2; W <- W + eta*m/(sqrt(v)+tau)
// No bias correction terms.
void fedadam_update(ServerState& state, const std::vector<double>& delta, double beta1,
                    double beta2, double eta, double tau);

// Dispatches on config.kind and advances state.round.
void apply_strategy_update(ServerState& state, const std::vector<double>& delta,
                           const StrategyConfig& config);

}  // namespace fedsim
