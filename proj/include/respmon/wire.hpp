#pragma once

// Telemetry framing. Every frame on the wire is
//
//   0xA5 | version 0x01 | kind u8 | seq u16 | flags u8 | len u8 | payload[len] | crc8
//
// little-endian throughout; crc8 is polynomial 0x07, init 0x00, computed over
// version..payload inclusive.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "respmon/sensor_model.hpp"

namespace respmon::wire {

inline constexpr uint8_t kMagic = 0xA5;
inline constexpr uint8_t kVersion = 0x01;
inline constexpr size_t kHeaderSize = 7;  // magic..len
inline constexpr size_t kTrailerSize = 1;
inline constexpr size_t kMaxPayload = 244;
inline constexpr size_t kMaxFrameSize = kHeaderSize + kMaxPayload + kTrailerSize;

inline constexpr uint8_t kFlagFinalFlush = 0x01;
inline constexpr uint8_t kFlagCharging = 0x02;

enum class FrameKind : uint8_t { FsrBatch = 0x01, AccelBatch = 0x02, BatteryStatus = 0x03 };

struct AccelTriple {
    int16_t x_mg = 0;
    int16_t y_mg = 0;
    int16_t z_mg = 0;
    bool operator==(const AccelTriple&) const = default;
};

struct FsrBatchPayload {
    uint32_t t0_ms = 0;
    std::vector<uint16_t> codes;
    bool operator==(const FsrBatchPayload&) const = default;
};

struct AccelBatchPayload {
    uint32_t t0_ms = 0;
    std::vector<AccelTriple> samples;
    bool operator==(const AccelBatchPayload&) const = default;
};

struct BatteryStatusPayload {
    uint32_t t_ms = 0;
    uint16_t adc_code = 0;
    uint8_t percent = 0;
    bool operator==(const BatteryStatusPayload&) const = default;
};

using Payload = std::variant<FsrBatchPayload, AccelBatchPayload, BatteryStatusPayload>;

struct TelemetryFrame {
    uint16_t seq = 0;
    uint8_t flags = 0;
    Payload payload;

    FrameKind kind() const;
    bool final_flush() const { return (flags & kFlagFinalFlush) != 0; }
    bool charging() const { return (flags & kFlagCharging) != 0; }
    bool operator==(const TelemetryFrame&) const = default;
};

size_t fsr_payload_size(size_t count);
size_t accel_payload_size(size_t count);
inline constexpr size_t kBatteryPayloadSize = 7;
size_t payload_size(const Payload& p);

uint8_t crc8(std::span<const uint8_t> bytes, uint8_t init = 0x00);

// Throws InvalidParameter for frames that violate payload invariants
// (oversize-frame, empty batch, out-of-range code or percent).
std::vector<uint8_t> encode(const TelemetryFrame& frame);
void encode_append(const TelemetryFrame& frame, std::vector<uint8_t>& out);

enum class DecodeError {
    Truncated,
    BadMagic,
    BadVersion,
    BadCrc,
    UnknownKind,
    LengthMismatch,    // trailing bytes after the frame
    MalformedPayload,  // len disagrees with the kind's record layout
};

std::string_view to_string(DecodeError e);

using DecodeResult = std::variant<TelemetryFrame, DecodeError>;

// Decodes exactly one frame occupying all of `bytes`.
DecodeResult decode(std::span<const uint8_t> bytes);

struct ResyncEvent {
    uint64_t offset = 0;        // stream offset of the first discarded byte
    uint64_t skipped_bytes = 0;
};

// Incremental splitter for a byte stream of concatenated frames. On corruption
// it discards bytes up to the next magic byte and records a resync event; no
// frame failing validation is ever delivered. One instance per connection.
class StreamSplitter {
public:
    // Appends bytes and returns the frames completed by them.
    std::vector<TelemetryFrame> feed(std::span<const uint8_t> bytes);

    const std::vector<ResyncEvent>& resyncs() const { return resyncs_; }
    size_t pending_bytes() const { return buf_.size() - head_; }
    uint64_t frames_delivered() const { return delivered_; }

private:
    void discard(size_t n);

    std::vector<uint8_t> buf_;
    size_t head_ = 0;
    uint64_t offset_ = 0;  // stream offset of buf_[head_]
    uint64_t delivered_ = 0;
    bool in_sync_ = true;
    std::vector<ResyncEvent> resyncs_;
};

struct SplitResult {
    std::vector<TelemetryFrame> frames;
    std::vector<ResyncEvent> resyncs;
    size_t pending_bytes = 0;
};

SplitResult stream_split(std::span<const uint8_t> bytes);

}  // namespace respmon::wire
