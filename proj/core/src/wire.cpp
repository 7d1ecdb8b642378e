#include "fedsim/wire.hpp"

#include <cstring>
#include <limits>

namespace fedsim {

namespace {

constexpr std::uint8_t kMagic[4] = {'F', 'L', 'P', '1'};
constexpr std::size_t kHeaderSize = 4 + 1 + 4 + 4;

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
    buf.push_back(static_cast<std::uint8_t>(v));
    buf.push_back(static_cast<std::uint8_t>(v >> 8));
    buf.push_back(static_cast<std::uint8_t>(v >> 16));
    buf.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_u64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

void put_f32(std::vector<std::uint8_t>& buf, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(buf, bits);
}

float get_f32(const std::uint8_t* p) {
    const std::uint32_t bits = get_u32(p);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

bool valid_kind(std::uint8_t k) {
    return k >= static_cast<std::uint8_t>(MsgKind::Hello) &&
           k <= static_cast<std::uint8_t>(MsgKind::Abort);
}

}  // namespace

std::vector<std::uint8_t> encode(const WireMessage& message) {
    if (message.params.size() > std::numeric_limits<std::uint32_t>::max())
        throw ProtocolError("parameter count exceeds u32");

    std::vector<std::uint8_t> payload;
    switch (message.kind) {
        case MsgKind::Hello:
            put_u32(payload, message.client_id);
            break;
        case MsgKind::Broadcast:
            put_u32(payload, static_cast<std::uint32_t>(message.params.size()));
            for (float f : message.params) put_f32(payload, f);
            break;
        case MsgKind::Update:
            put_u32(payload, static_cast<std::uint32_t>(message.params.size()));
            for (float f : message.params) put_f32(payload, f);
            put_u64(payload, message.n);
            break;
        case MsgKind::HelloAck:
        case MsgKind::Done:
        case MsgKind::Abort:
            break;
    }

    std::vector<std::uint8_t> frame;
    frame.reserve(kHeaderSize + payload.size());
    frame.insert(frame.end(), kMagic, kMagic + 4);
    frame.push_back(static_cast<std::uint8_t>(message.kind));
    put_u32(frame, message.round);
    put_u32(frame, static_cast<std::uint32_t>(payload.size()));
    frame.insert(frame.end(), payload.begin(), payload.end());
    return frame;
}

DecodeStatus decode(std::span<const std::uint8_t> bytes, WireMessage& out,
                    std::size_t& consumed) {
    consumed = 0;
    if (bytes.size() < kHeaderSize) return DecodeStatus::Incomplete;
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) return DecodeStatus::Error;
    const std::uint8_t kind = bytes[4];
    if (!valid_kind(kind)) return DecodeStatus::Error;
    const std::uint32_t round = get_u32(bytes.data() + 5);
    const std::uint32_t payload_len = get_u32(bytes.data() + 9);
    if (bytes.size() < kHeaderSize + payload_len) return DecodeStatus::Incomplete;

    const std::uint8_t* p = bytes.data() + kHeaderSize;
    WireMessage msg;
    msg.kind = static_cast<MsgKind>(kind);
    msg.round = round;
    switch (msg.kind) {
        case MsgKind::Hello:
            if (payload_len != 4) return DecodeStatus::Error;
            msg.client_id = get_u32(p);
            break;
        case MsgKind::Broadcast:
        case MsgKind::Update: {
            if (payload_len < 4) return DecodeStatus::Error;
            const std::uint32_t count = get_u32(p);
            const std::size_t tail = msg.kind == MsgKind::Update ? 8 : 0;
            if (payload_len != 4 + static_cast<std::size_t>(count) * 4 + tail)
                return DecodeStatus::Error;
            msg.params.resize(count);
            for (std::uint32_t i = 0; i < count; ++i) msg.params[i] = get_f32(p + 4 + i * 4);
            if (msg.kind == MsgKind::Update) msg.n = get_u64(p + 4 + count * 4);
            break;
        }
        case MsgKind::HelloAck:
        case MsgKind::Done:
        case MsgKind::Abort:
            if (payload_len != 0) return DecodeStatus::Error;
            break;
    }
    out = std::move(msg);
    consumed = kHeaderSize + payload_len;
    return DecodeStatus::Ok;
}

std::vector<float> to_wire_values(const std::vector<double>& values) {
    std::vector<float> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = static_cast<float>(values[i]);
    return out;
}

std::vector<double> from_wire_values(const std::vector<float>& values) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = static_cast<double>(values[i]);
    return out;
}

}  // namespace fedsim
