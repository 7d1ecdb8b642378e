#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/orchestrator.hpp"
#include "fedsim/wire.hpp"

namespace fedsim {

class TransportError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Blocking TCP connection framing WireMessages. Move-only RAII over the fd.
class FrameConnection {
  public:
    explicit FrameConnection(int fd);
    FrameConnection(FrameConnection&& other) noexcept;
    FrameConnection& operator=(FrameConnection&& other) noexcept;
    FrameConnection(const FrameConnection&) = delete;
    FrameConnection& operator=(const FrameConnection&) = delete;
    ~FrameConnection();

    void write_message(const WireMessage& message);
    // Blocks until one full frame is available. Throws ProtocolError on a
    // malformed frame, TransportError on EOF/IO failure.
    WireMessage read_message();

  private:
    int fd_ = -1;
    std::vector<std::uint8_t> buffer_;
};

// Connects with retries (the server may not be listening yet).
FrameConnection connect_to(const std::string& host, std::uint16_t port,
                           int max_attempts = 100);

struct ServeConfig {
    std::uint16_t port = 0;  // 0 = ephemeral
    ExperimentConfig experiment;
};

// Runs the full experiment over the wire: waits for experiment.num_clients
// Hello handshakes, then per round broadcasts W to the participants and
// collects one Update each. Aggregation/strategy/evaluation are identical to
// the in-process orchestrator; `clients` here is the server's local copy of
// the data used only to evaluate the global model (training data never
// crosses the wire). Any protocol violation or disconnect aborts the round:
// Abort is sent to all clients and a TransportError is thrown.
// `bound_port`, when non-null, receives the actual listening port before
// clients are awaited.
std::vector<RoundMetrics> serve_experiment(const ServeConfig& config,
                                           const std::vector<PreparedClient>& clients,
                                           ParamVector* final_weights = nullptr,
                                           std::uint16_t* bound_port = nullptr);

struct ClientSessionConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;
    int client_id = 0;
    std::uint64_t seed = 0;  // the experiment seed; local RNG streams derive from it
    LocalTrainSpec local;
    SgdHyper sgd;
    std::vector<int> layer_sizes{7, 16, 16, 5};
    Batch train;
};

// Hello -> (Broadcast -> local train -> Update)* -> Done. Returns normally
// on Done; throws TransportError/ProtocolError on Abort or protocol faults.
void run_client_session(const ClientSessionConfig& config);

}  // namespace fedsim
