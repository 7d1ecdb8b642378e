#include "fedsim/strategies.hpp"

#include <cmath>
#include <stdexcept>

namespace fedsim {

std::string strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::FedAvg: return "fedavg";
        case StrategyKind::FedAvgM: return "fedavgm";
        case StrategyKind::FedProx: return "fedprox";
        case StrategyKind::FedAdam: return "fedadam";
    }
    return "?";
}

StrategyKind parse_strategy(const std::string& name) {
    if (name == "fedavg") return StrategyKind::FedAvg;
    if (name == "fedavgm") return StrategyKind::FedAvgM;
    if (name == "fedprox") return StrategyKind::FedProx;
    if (name == "fedadam") return StrategyKind::FedAdam;
    throw std::invalid_argument("unknown strategy: " + name);
}

void StrategyConfig::validate() const {
    if (beta < 0.0 || beta >= 1.0) throw std::invalid_argument("beta must be in [0, 1)");
    if (mu < 0.0) throw std::invalid_argument("mu must be >= 0");
    if (beta1 < 0.0 || beta1 >= 1.0) throw std::invalid_argument("beta1 must be in [0, 1)");
    if (beta2 < 0.0 || beta2 >= 1.0) throw std::invalid_argument("beta2 must be in [0, 1)");
    if (eta <= 0.0) throw std::invalid_argument("eta must be > 0");
    if (tau <= 0.0) throw std::invalid_argument("tau must be > 0");
}

ServerState make_server_state(ParamVector initial_weights, const StrategyConfig& config) {
    ServerState state;
    state.weights = std::move(initial_weights);
    const std::size_t n = state.weights.values.size();
    if (config.kind == StrategyKind::FedAvgM) state.v_momentum.assign(n, 0.0);
    if (config.kind == StrategyKind::FedAdam) {
        state.adam_m.assign(n, 0.0);
        state.adam_v.assign(n, 0.0);
    }
    return state;
}

std::vector<double> aggregate_deltas(const std::vector<ClientUpdate>& updates) {
    if (updates.empty()) throw std::invalid_argument("aggregate_deltas: no updates");
    const std::size_t dim = updates.front().delta.size();
    std::uint64_t total = 0;
    for (const auto& u : updates) {
        if (u.delta.size() != dim)
            throw std::invalid_argument("aggregate_deltas: delta shape mismatch");
        if (u.n < 1) throw std::invalid_argument("aggregate_deltas: n must be >= 1");
        total += u.n;
    }
    std::vector<double> agg(dim, 0.0);
    for (const auto& u : updates) {
        const double p = static_cast<double>(u.n) / static_cast<double>(total);
        for (std::size_t j = 0; j < dim; ++j) agg[j] += p * u.delta[j];
    }
    return agg;
}

namespace {
void check_dim(const ServerState& state, const std::vector<double>& delta) {
    if (delta.size() != state.weights.values.size())
        throw std::invalid_argument("strategy update: delta shape mismatch");
}
}  // namespace

void fedavg_update(ServerState& state, const std::vector<double>& delta) {
    check_dim(state, delta);
    for (std::size_t j = 0; j < delta.size(); ++j) state.weights.values[j] += delta[j];
}

void fedavgm_update(ServerState& state, const std::vector<double>& delta, double beta) {
    check_dim(state, delta);
    if (state.v_momentum.size() != delta.size())
        throw std::invalid_argument("fedavgm: momentum buffer not initialized");
    for (std::size_t j = 0; j < delta.size(); ++j) {
        state.v_momentum[j] = beta * state.v_momentum[j] + delta[j];
        state.weights.values[j] += state.v_momentum[j];
    }
}

void fedprox_update(ServerState& state, const std::vector<double>& delta) {
    fedavg_update(state, delta);
}

void fedadam_update(ServerState& state, const std::vector<double>& delta, double beta1,
                    double beta2, double eta, double tau) {
    check_dim(state, delta);
    if (state.adam_m.size() != delta.size() || state.adam_v.size() != delta.size())
        throw std::invalid_argument("fedadam: moment buffers not initialized");
    for (std::size_t j = 0; j < delta.size(); ++j) {
        state.adam_m[j] = beta1 * state.adam_m[j] + (1.0 - beta1) * delta[j];
        state.adam_v[j] = beta2 * state.adam_v[j] + (1.0 - beta2) * delta[j] * delta[j];
        state.weights.values[j] += eta * state.adam_m[j] / (std::sqrt(state.adam_v[j]) + tau);
    }
}

void apply_strategy_update(ServerState& state, const std::vector<double>& delta,
                           const StrategyConfig& config) {
    switch (config.kind) {
        case StrategyKind::FedAvg: fedavg_update(state, delta); break;
        case StrategyKind::FedAvgM: fedavgm_update(state, delta, config.beta); break;
        case StrategyKind::FedProx: fedprox_update(state, delta); break;
        case StrategyKind::FedAdam:
            fedadam_update(state, delta, config.beta1, config.beta2, config.eta, config.tau);
            break;
    }
    ++state.round;
}

}  // namespace fedsim
