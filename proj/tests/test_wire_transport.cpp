#include <doctest.h>

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <thread>

#include "fedsim/transport.hpp"
#include "fedsim/wire.hpp"

using namespace fedsim;

namespace {

// Distinct fixed ports per test; connect_to retries until the server listens.
std::uint16_t test_port(int offset) {
    return static_cast<std::uint16_t>(30000 + (::getpid() % 20000) + offset);
}

WireMessage decode_one(const std::vector<std::uint8_t>& bytes) {
    WireMessage out;
    std::size_t consumed = 0;
    const DecodeStatus status = decode(bytes, out, consumed);
    REQUIRE(status == DecodeStatus::Ok);
    REQUIRE(consumed == bytes.size());
    return out;
}

}  // namespace

TEST_CASE("encode: exact frame bytes") {
    WireMessage hello;
    hello.kind = MsgKind::Hello;
    hello.client_id = 7;
    const auto frame = encode(hello);
    // "FLP1" | kind 1 | round 0 | payload_len 4 | client_id 7, all LE
    const std::vector<std::uint8_t> expected{'F', 'L', 'P', '1', 1, 0, 0, 0, 0,
                                             4, 0, 0, 0, 7, 0, 0, 0};
    CHECK(frame == expected);

    WireMessage bcast;
    bcast.kind = MsgKind::Broadcast;
    bcast.round = 3;
    const auto empty = encode(bcast);
    // empty ParamVector payload is just the count field
    CHECK(empty.size() == 13 + 4);
    CHECK(empty[4] == 3);                          // kind
    CHECK(empty[5] == 3);                          // round LSB
    CHECK(empty[9] == 4);                          // payload_len LSB
    CHECK((empty[13] | empty[14] | empty[15] | empty[16]) == 0);  // count 0

    WireMessage ack;
    ack.kind = MsgKind::HelloAck;
    CHECK(encode(ack).size() == 13);  // header only
}

TEST_CASE("encode/decode round-trip property") {
    Rng rng(71);
    for (int trial = 0; trial < 1000; ++trial) {
        WireMessage msg;
        const int kind = static_cast<int>(rng.uniform_int(1, 6));
        msg.kind = static_cast<MsgKind>(kind);
        msg.round = static_cast<std::uint32_t>(rng.uniform_int(0, 1000000));
        if (msg.kind == MsgKind::Hello)
            msg.client_id = static_cast<std::uint32_t>(rng.uniform_int(0, 4096));
        if (msg.kind == MsgKind::Broadcast || msg.kind == MsgKind::Update) {
            const int count = static_cast<int>(rng.uniform_int(0, 600));
            for (int j = 0; j < count; ++j)
                msg.params.push_back(static_cast<float>(rng.uniform(-10.0, 10.0)));
        }
        if (msg.kind == MsgKind::Update) msg.n = rng.next_u64();

        const WireMessage out = decode_one(encode(msg));
        CHECK(out.kind == msg.kind);
        CHECK(out.round == msg.round);
        CHECK(out.client_id == msg.client_id);
        CHECK(out.params == msg.params);
        CHECK(out.n == msg.n);
    }
}

TEST_CASE("decode: incomplete, bad magic, unknown kind, bad payload") {
    WireMessage msg;
    msg.kind = MsgKind::Update;
    msg.round = 5;
    msg.params = {1.0f, 2.0f};
    msg.n = 99;
    const auto frame = encode(msg);

    WireMessage out;
    std::size_t consumed = 0;

    // every strict prefix is Incomplete
    for (std::size_t len = 0; len < frame.size(); ++len) {
        const std::vector<std::uint8_t> prefix(frame.begin(),
                                               frame.begin() + static_cast<std::ptrdiff_t>(len));
        CHECK(decode(prefix, out, consumed) == DecodeStatus::Incomplete);
    }

    // trailing bytes belong to the next frame and are left alone
    auto two = frame;
    two.insert(two.end(), frame.begin(), frame.end());
    CHECK(decode(two, out, consumed) == DecodeStatus::Ok);
    CHECK(consumed == frame.size());

    auto bad_magic = frame;
    bad_magic[0] = 'X';
    CHECK(decode(bad_magic, out, consumed) == DecodeStatus::Error);

    auto bad_kind = frame;
    bad_kind[4] = 0;
    CHECK(decode(bad_kind, out, consumed) == DecodeStatus::Error);
    bad_kind[4] = 7;
    CHECK(decode(bad_kind, out, consumed) == DecodeStatus::Error);

    // payload_len inconsistent with the declared value count
    auto bad_len = frame;
    bad_len[13] = 200;  // count field claims 200 floats in an 8-byte payload
    CHECK(decode(bad_len, out, consumed) == DecodeStatus::Error);
}

TEST_CASE("loopback experiment equals the in-process orchestrator") {
    ExperimentConfig cfg;
    cfg.rounds = 3;
    cfg.num_clients = 3;
    cfg.first_round_participants = 2;
    cfg.later_round_participants = 2;
    cfg.data.num_clients = 3;
    cfg.data.fixed_train_size = 128;
    cfg.data.seed = 14;
    cfg.seed = 14;

    const auto datasets = generate_all_clients(cfg.data, builtin_hormone_table());
    const auto clients = prepare_clients(datasets);

    ParamVector ref_weights;
    const auto ref = run_experiment(cfg, clients, &ref_weights);

    ServeConfig serve;
    const std::uint16_t port = test_port(0);
    serve.port = port;
    serve.experiment = cfg;

    std::vector<RoundMetrics> wire_metrics;
    ParamVector wire_weights;
    std::exception_ptr server_error;

    std::thread server([&] {
        try {
            wire_metrics = serve_experiment(serve, clients, &wire_weights);
        } catch (...) {
            server_error = std::current_exception();
        }
    });

    std::vector<std::thread> client_threads;
    for (int cid = 0; cid < 3; ++cid)
        client_threads.emplace_back([&, cid] {
            ClientSessionConfig c;
            c.port = port;
            c.client_id = cid;
            c.seed = cfg.seed;
            c.local = cfg.local;
            c.local.proximal_mu = cfg.strategy.client_proximal_mu();
            c.sgd = cfg.sgd;
            c.train = clients[static_cast<std::size_t>(cid)].train;
            run_client_session(c);
        });
    for (auto& t : client_threads) t.join();
    server.join();
    if (server_error) std::rethrow_exception(server_error);

    REQUIRE(wire_metrics.size() == ref.size());
    for (std::size_t t = 0; t < ref.size(); ++t) {
        CHECK(wire_metrics[t].participants == ref[t].participants);
        // the wire carries float32 deltas, the in-process path float64; the
        // trajectories agree to well inside evaluation noise
        CHECK(std::abs(wire_metrics[t].weighted_accuracy - ref[t].weighted_accuracy) < 0.01);
        CHECK(std::abs(wire_metrics[t].weighted_loss - ref[t].weighted_loss) < 0.05);
    }
    REQUIRE(wire_weights.values.size() == ref_weights.values.size());
    for (std::size_t j = 0; j < ref_weights.values.size(); ++j)
        CHECK(std::abs(wire_weights.values[j] - ref_weights.values[j]) < 1e-3);
}

TEST_CASE("server aborts on a protocol violation and clients observe it") {
    ExperimentConfig cfg;
    cfg.rounds = 2;
    cfg.num_clients = 1;
    cfg.first_round_participants = 1;
    cfg.later_round_participants = 1;
    cfg.data.num_clients = 1;
    cfg.data.fixed_train_size = 32;
    cfg.data.seed = 5;
    cfg.seed = 5;

    const auto datasets = generate_all_clients(cfg.data, builtin_hormone_table());
    const auto clients = prepare_clients(datasets);

    ServeConfig serve;
    const std::uint16_t port = test_port(1);
    serve.port = port;
    serve.experiment = cfg;

    bool server_threw = false;
    std::thread server([&] {
        try {
            serve_experiment(serve, clients);
        } catch (const ProtocolError&) {
            server_threw = true;
        }
    });

    bool client_aborted = false;
    {
        FrameConnection conn = connect_to("127.0.0.1", port);
        WireMessage hello;
        hello.kind = MsgKind::Hello;
        hello.client_id = 0;
        conn.write_message(hello);
        REQUIRE(conn.read_message().kind == MsgKind::HelloAck);

        const WireMessage bcast = conn.read_message();
        REQUIRE(bcast.kind == MsgKind::Broadcast);
        REQUIRE(bcast.round == 1);

        // reply with an Update stamped for the wrong round
        WireMessage update;
        update.kind = MsgKind::Update;
        update.round = 2;
        update.params.assign(bcast.params.size(), 0.0f);
        update.n = 32;
        conn.write_message(update);

        try {
            const WireMessage next = conn.read_message();
            client_aborted = next.kind == MsgKind::Abort;
        } catch (const TransportError&) {
            client_aborted = true;  // server may close before the Abort lands
        }
    }
    server.join();
    CHECK(server_threw);
    CHECK(client_aborted);
}
