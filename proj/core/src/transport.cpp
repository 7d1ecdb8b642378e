#include "fedsim/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstring>
#include <map>
#include <thread>

namespace fedsim {

namespace {

void close_fd(int fd) {
    if (fd >= 0) ::close(fd);
}

void send_all(int fd, const std::uint8_t* data, std::size_t len) {
    std::size_t sent = 0;
    while (sent < len) {
        const ssize_t r = ::send(fd, data + sent, len - sent, MSG_NOSIGNAL);
        if (r <= 0) throw TransportError("send failed");
        sent += static_cast<std::size_t>(r);
    }
}

}  // namespace

FrameConnection::FrameConnection(int fd) : fd_(fd) {
    const int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

FrameConnection::FrameConnection(FrameConnection&& other) noexcept
    : fd_(other.fd_), buffer_(std::move(other.buffer_)) {
    other.fd_ = -1;
}

FrameConnection& FrameConnection::operator=(FrameConnection&& other) noexcept {
    if (this != &other) {
        close_fd(fd_);
        fd_ = other.fd_;
        buffer_ = std::move(other.buffer_);
        other.fd_ = -1;
    }
    return *this;
}

FrameConnection::~FrameConnection() { close_fd(fd_); }

void FrameConnection::write_message(const WireMessage& message) {
    const std::vector<std::uint8_t> frame = encode(message);
    send_all(fd_, frame.data(), frame.size());
}

WireMessage FrameConnection::read_message() {
    for (;;) {
        WireMessage msg;
        std::size_t consumed = 0;
        const DecodeStatus status = decode(buffer_, msg, consumed);
        if (status == DecodeStatus::Ok) {
            buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(consumed));
            return msg;
        }
        if (status == DecodeStatus::Error) throw ProtocolError("malformed frame");

        std::uint8_t chunk[65536];
        const ssize_t r = ::recv(fd_, chunk, sizeof(chunk), 0);
        if (r == 0) throw TransportError("peer closed connection");
        if (r < 0) throw TransportError("recv failed");
        buffer_.insert(buffer_.end(), chunk, chunk + r);
    }
}

FrameConnection connect_to(const std::string& host, std::uint16_t port, int max_attempts) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw TransportError("bad host address: " + host);

    for (int attempt = 0;; ++attempt) {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw TransportError("socket() failed");
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0)
            return FrameConnection(fd);
        close_fd(fd);
        if (attempt + 1 >= max_attempts)
            throw TransportError("connect failed: " + host + ":" + std::to_string(port));
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
}

namespace {

class ListenSocket {
  public:
    explicit ListenSocket(std::uint16_t port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw TransportError("socket() failed");
        const int one = 1;
        ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_ANY);
        addr.sin_port = htons(port);
        if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
            close_fd(fd_);
            throw TransportError("bind failed on port " + std::to_string(port));
        }
        if (::listen(fd_, 64) != 0) {
            close_fd(fd_);
            throw TransportError("listen failed");
        }
    }
    ~ListenSocket() { close_fd(fd_); }
    ListenSocket(const ListenSocket&) = delete;
    ListenSocket& operator=(const ListenSocket&) = delete;

    std::uint16_t port() const {
        sockaddr_in addr{};
        socklen_t len = sizeof(addr);
        if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
            throw TransportError("getsockname failed");
        return ntohs(addr.sin_port);
    }

    FrameConnection accept() {
        const int fd = ::accept(fd_, nullptr, nullptr);
        if (fd < 0) throw TransportError("accept failed");
        return FrameConnection(fd);
    }

  private:
    int fd_ = -1;
};

void abort_all(std::map<int, FrameConnection>& sessions) {
    for (auto& [cid, conn] : sessions) {
        try {
            conn.write_message(WireMessage{MsgKind::Abort});
        } catch (const TransportError&) {
            // already-gone peers don't block the abort fan-out
        }
    }
}

}  // namespace

std::vector<RoundMetrics> serve_experiment(const ServeConfig& config,
                                           const std::vector<PreparedClient>& clients,
                                           ParamVector* final_weights,
                                           std::uint16_t* bound_port) {
    const ExperimentConfig& exp = config.experiment;
    exp.validate();
    if (clients.size() != static_cast<std::size_t>(exp.num_clients))
        throw std::invalid_argument("serve_experiment: evaluation client count mismatch");

    ListenSocket listener(config.port);
    if (bound_port != nullptr) *bound_port = listener.port();

    // Handshake: every client announces its id before the first round.
    std::map<int, FrameConnection> sessions;
    for (int i = 0; i < exp.num_clients; ++i) {
        FrameConnection conn = listener.accept();
        const WireMessage hello = conn.read_message();
        if (hello.kind != MsgKind::Hello) throw ProtocolError("expected Hello");
        const int cid = static_cast<int>(hello.client_id);
        if (cid < 0 || cid >= exp.num_clients) throw ProtocolError("client id out of range");
        if (sessions.count(cid) != 0) throw ProtocolError("duplicate client id");
        conn.write_message(WireMessage{MsgKind::HelloAck});
        sessions.emplace(cid, std::move(conn));
    }

    Rng init_rng(mix_seed(exp.seed, kStreamModelInit));
    ServerState state = make_server_state(init_model(init_rng, exp.model), exp.strategy);
    Rng participation_rng(mix_seed(exp.seed, kStreamParticipation));

    std::vector<RoundMetrics> all;
    all.reserve(static_cast<std::size_t>(exp.rounds));
    try {
        for (int t = 1; t <= exp.rounds; ++t) {
            const std::vector<int> participants = sample_participants(participation_rng, t, exp);

            WireMessage broadcast;
            broadcast.kind = MsgKind::Broadcast;
            broadcast.round = static_cast<std::uint32_t>(t);
            broadcast.params = to_wire_values(state.weights.values);
            for (int cid : participants) sessions.at(cid).write_message(broadcast);

            std::vector<ClientUpdate> updates;
            updates.reserve(participants.size());
            for (int cid : participants) {
                const WireMessage msg = sessions.at(cid).read_message();
                if (msg.kind != MsgKind::Update) throw ProtocolError("expected Update");
                if (msg.round != static_cast<std::uint32_t>(t))
                    throw ProtocolError("Update for wrong round");
                if (msg.params.size() != state.weights.values.size())
                    throw ProtocolError("Update parameter count mismatch");
                ClientUpdate u;
                u.client_id = cid;
                u.delta = from_wire_values(msg.params);
                u.n = msg.n;
                updates.push_back(std::move(u));
            }

            // Same round-delta scaling as the in-process orchestrator:
            // p_i = n_i / N over all clients' training examples.
            std::vector<double> delta = aggregate_deltas(updates);
            double n_total = 0.0, n_participants = 0.0;
            for (const auto& c : clients) n_total += static_cast<double>(c.train.rows);
            for (const auto& u : updates) n_participants += static_cast<double>(u.n);
            const double scale = n_participants / n_total;
            for (double& d : delta) d *= scale;
            apply_strategy_update(state, delta, exp.strategy);

            RoundMetrics metrics;
            metrics.round = t;
            metrics.participants = participants;
            for (const auto& client : clients) {
                const EvalResult r = evaluate(state.weights, client.test);
                metrics.per_client.push_back(ClientEval{client.client_id, r.accuracy, r.loss,
                                                        static_cast<std::size_t>(client.test.rows)});
            }
            metrics.weighted_accuracy = weighted_accuracy(metrics.per_client);
            metrics.weighted_loss = weighted_loss(metrics.per_client);
            all.push_back(std::move(metrics));
        }
    } catch (...) {
        abort_all(sessions);
        throw;
    }

    for (auto& [cid, conn] : sessions) conn.write_message(WireMessage{MsgKind::Done});
    if (final_weights != nullptr) *final_weights = state.weights;
    return all;
}

void run_client_session(const ClientSessionConfig& config) {
    FrameConnection conn = connect_to(config.host, config.port);
    WireMessage hello;
    hello.kind = MsgKind::Hello;
    hello.client_id = static_cast<std::uint32_t>(config.client_id);
    conn.write_message(hello);
    const WireMessage ack = conn.read_message();
    if (ack.kind != MsgKind::HelloAck) throw ProtocolError("expected HelloAck");

    for (;;) {
        const WireMessage msg = conn.read_message();
        if (msg.kind == MsgKind::Done) return;
        if (msg.kind == MsgKind::Abort) throw TransportError("server aborted the run");
        if (msg.kind != MsgKind::Broadcast) throw ProtocolError("unexpected message kind");

        ParamVector weights;
        weights.layer_sizes = config.layer_sizes;
        weights.values = from_wire_values(msg.params);
        if (weights.values.size() != param_count(weights.layer_sizes))
            throw ProtocolError("Broadcast parameter count mismatch");

        Rng rng(mix_seed(config.seed, kStreamLocalTrain + msg.round,
                         static_cast<std::uint64_t>(config.client_id)));
        const LocalTrainResult res = local_train(weights, config.train, config.local, config.sgd, rng);

        WireMessage update;
        update.kind = MsgKind::Update;
        update.round = msg.round;
        update.n = static_cast<std::uint64_t>(config.train.rows);
        std::vector<double> delta(res.weights.values.size());
        for (std::size_t j = 0; j < delta.size(); ++j)
            delta[j] = res.weights.values[j] - weights.values[j];
        update.params = to_wire_values(delta);
        conn.write_message(update);
    }
}

}  // namespace fedsim
