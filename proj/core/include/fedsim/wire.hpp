#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fedsim {

// Frame layout, little-endian throughout:
//   magic "FLP1" | kind u8 | round u32 | payload_len u32 | payload
// Payloads:
//   Hello:     client_id u32
//   Broadcast: count u32, count float32 values
//   Update:    count u32, count float32 values, n u64
//   HelloAck/Done/Abort: empty
enum class MsgKind : std::uint8_t {
    Hello = 1,
    HelloAck = 2,
    Broadcast = 3,
    Update = 4,
    Done = 5,
    Abort = 6,
};

struct WireMessage {
    MsgKind kind = MsgKind::Hello;
    std::uint32_t round = 0;
    std::uint32_t client_id = 0;       // Hello
    std::vector<float> params;         // Broadcast / Update
    std::uint64_t n = 0;               // Update
};

class ProtocolError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class DecodeStatus { Ok, Incomplete, Error };

// Throws ProtocolError if the parameter count exceeds u32.
std::vector<std::uint8_t> encode(const WireMessage& message);

// Attempts to decode one frame from the front of the buffer. On Ok,
// `consumed` is the frame length. Incomplete means the caller should read
// more bytes; Error is unrecoverable (bad magic, unknown kind, malformed
// payload).
DecodeStatus decode(std::span<const std::uint8_t> bytes, WireMessage& out, std::size_t& consumed);

// float32 downcast/upcast helpers for the wire boundary.
std::vector<float> to_wire_values(const std::vector<double>& values);
std::vector<double> from_wire_values(const std::vector<float>& values);

}  // namespace fedsim
