#include "respmon/wire.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "respmon/errors.hpp"

namespace respmon::wire {

namespace {

constexpr std::array<uint8_t, 256> make_crc_table() {
    std::array<uint8_t, 256> table{};
    for (unsigned i = 0; i < 256; ++i) {
        uint8_t c = static_cast<uint8_t>(i);
        for (int b = 0; b < 8; ++b) c = (c & 0x80) ? static_cast<uint8_t>((c << 1) ^ 0x07) : static_cast<uint8_t>(c << 1);
        table[i] = c;
    }
    return table;
}

constexpr auto kCrcTable = make_crc_table();
constexpr uint16_t kMaxCode = 4095;

void put_u8(std::vector<uint8_t>& out, uint8_t v) { out.push_back(v); }

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xFF));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

class Reader {
public:
    explicit Reader(std::span<const uint8_t> b) : b_(b) {}
    uint8_t u8() { return b_[pos_++]; }
    uint16_t u16() {
        const uint16_t v = static_cast<uint16_t>(b_[pos_] | (b_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    int16_t i16() { return static_cast<int16_t>(u16()); }
    uint32_t u32() {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

private:
    std::span<const uint8_t> b_;
    size_t pos_ = 0;
};

struct PayloadWriter {
    std::vector<uint8_t>& out;

    void operator()(const FsrBatchPayload& p) const {
        put_u32(out, p.t0_ms);
        put_u8(out, static_cast<uint8_t>(p.codes.size()));
        for (uint16_t c : p.codes) put_u16(out, c);
    }
    void operator()(const AccelBatchPayload& p) const {
        put_u32(out, p.t0_ms);
        put_u8(out, static_cast<uint8_t>(p.samples.size()));
        for (const auto& s : p.samples) {
            put_u16(out, static_cast<uint16_t>(s.x_mg));
            put_u16(out, static_cast<uint16_t>(s.y_mg));
            put_u16(out, static_cast<uint16_t>(s.z_mg));
        }
    }
    void operator()(const BatteryStatusPayload& p) const {
        put_u32(out, p.t_ms);
        put_u16(out, p.adc_code);
        put_u8(out, p.percent);
    }
};

void validate_payload(const Payload& payload) {
    const size_t size = payload_size(payload);
    if (size > kMaxPayload)
        throw InvalidParameter("encode: oversize-frame (payload " + std::to_string(size) +
                               " bytes > " + std::to_string(kMaxPayload) + ")");
    if (const auto* f = std::get_if<FsrBatchPayload>(&payload)) {
        if (f->codes.empty()) throw InvalidParameter("encode: empty FSR batch");
        if (std::any_of(f->codes.begin(), f->codes.end(), [](uint16_t c) { return c > kMaxCode; }))
            throw InvalidParameter("encode: FSR code exceeds 12 bits");
    } else if (const auto* a = std::get_if<AccelBatchPayload>(&payload)) {
        if (a->samples.empty()) throw InvalidParameter("encode: empty accel batch");
    } else if (const auto* b = std::get_if<BatteryStatusPayload>(&payload)) {
        if (b->percent > 100) throw InvalidParameter("encode: battery percent > 100");
        if (b->adc_code > kMaxCode) throw InvalidParameter("encode: battery code exceeds 12 bits");
    }
}

std::variant<Payload, DecodeError> parse_payload(FrameKind kind, std::span<const uint8_t> body) {
    Reader r(body);
    switch (kind) {
        case FrameKind::FsrBatch: {
            if (body.size() < 5) return DecodeError::MalformedPayload;
            FsrBatchPayload p;
            p.t0_ms = r.u32();
            const size_t count = r.u8();
            if (count == 0 || body.size() != fsr_payload_size(count))
                return DecodeError::MalformedPayload;
            p.codes.reserve(count);
            for (size_t i = 0; i < count; ++i) p.codes.push_back(r.u16());
            return Payload{std::move(p)};
        }
        case FrameKind::AccelBatch: {
            if (body.size() < 5) return DecodeError::MalformedPayload;
            AccelBatchPayload p;
            p.t0_ms = r.u32();
            const size_t count = r.u8();
            if (count == 0 || body.size() != accel_payload_size(count))
                return DecodeError::MalformedPayload;
            p.samples.reserve(count);
            for (size_t i = 0; i < count; ++i) {
                AccelTriple s;
                s.x_mg = r.i16();
                s.y_mg = r.i16();
                s.z_mg = r.i16();
                p.samples.push_back(s);
            }
            return Payload{std::move(p)};
        }
        case FrameKind::BatteryStatus: {
            if (body.size() != kBatteryPayloadSize) return DecodeError::MalformedPayload;
            BatteryStatusPayload p;
            p.t_ms = r.u32();
            p.adc_code = r.u16();
            p.percent = r.u8();
            if (p.percent > 100) return DecodeError::MalformedPayload;
            return Payload{p};
        }
    }
    return DecodeError::UnknownKind;
}

}  // namespace

FrameKind TelemetryFrame::kind() const {
    switch (payload.index()) {
        case 0: return FrameKind::FsrBatch;
        case 1: return FrameKind::AccelBatch;
        default: return FrameKind::BatteryStatus;
    }
}

size_t fsr_payload_size(size_t count) { return 4 + 1 + 2 * count; }
size_t accel_payload_size(size_t count) { return 4 + 1 + 6 * count; }

size_t payload_size(const Payload& p) {
    if (const auto* f = std::get_if<FsrBatchPayload>(&p)) return fsr_payload_size(f->codes.size());
    if (const auto* a = std::get_if<AccelBatchPayload>(&p)) return accel_payload_size(a->samples.size());
    return kBatteryPayloadSize;
}

uint8_t crc8(std::span<const uint8_t> bytes, uint8_t init) {
    uint8_t crc = init;
    for (uint8_t b : bytes) crc = kCrcTable[crc ^ b];
    return crc;
}

void encode_append(const TelemetryFrame& frame, std::vector<uint8_t>& out) {
    validate_payload(frame.payload);
    const size_t start = out.size();
    put_u8(out, kMagic);
    put_u8(out, kVersion);
    put_u8(out, static_cast<uint8_t>(frame.kind()));
    put_u16(out, frame.seq);
    put_u8(out, frame.flags);
    put_u8(out, static_cast<uint8_t>(payload_size(frame.payload)));
    std::visit(PayloadWriter{out}, frame.payload);
    const auto covered = std::span<const uint8_t>(out).subspan(start + 1);
    out.push_back(crc8(covered));
}

std::vector<uint8_t> encode(const TelemetryFrame& frame) {
    std::vector<uint8_t> out;
    out.reserve(kHeaderSize + payload_size(frame.payload) + kTrailerSize);
    encode_append(frame, out);
    return out;
}

std::string_view to_string(DecodeError e) {
    switch (e) {
        case DecodeError::Truncated: return "truncated";
        case DecodeError::BadMagic: return "bad-magic";
        case DecodeError::BadVersion: return "bad-version";
        case DecodeError::BadCrc: return "bad-crc";
        case DecodeError::UnknownKind: return "unknown-kind";
        case DecodeError::LengthMismatch: return "length-mismatch";
        case DecodeError::MalformedPayload: return "malformed-payload";
    }
    return "unknown";
}

DecodeResult decode(std::span<const uint8_t> bytes) {
    if (bytes.empty()) return DecodeError::Truncated;
    if (bytes[0] != kMagic) return DecodeError::BadMagic;
    if (bytes.size() < kHeaderSize + kTrailerSize) return DecodeError::Truncated;
    if (bytes[1] != kVersion) return DecodeError::BadVersion;
    const size_t len = bytes[6];
    const size_t total = kHeaderSize + len + kTrailerSize;
    if (bytes.size() < total) return DecodeError::Truncated;
    if (bytes.size() > total) return DecodeError::LengthMismatch;
    if (crc8(bytes.subspan(1, total - 2)) != bytes[total - 1]) return DecodeError::BadCrc;

    const uint8_t kind = bytes[2];
    if (kind < 0x01 || kind > 0x03) return DecodeError::UnknownKind;
    auto parsed = parse_payload(static_cast<FrameKind>(kind), bytes.subspan(kHeaderSize, len));
    if (auto* err = std::get_if<DecodeError>(&parsed)) return *err;

    TelemetryFrame f;
    f.seq = static_cast<uint16_t>(bytes[3] | (bytes[4] << 8));
    f.flags = bytes[5];
    f.payload = std::move(std::get<Payload>(parsed));
    return f;
}

void StreamSplitter::discard(size_t n) {
    if (in_sync_) {
        resyncs_.push_back({offset_, 0});
        in_sync_ = false;
    }
    resyncs_.back().skipped_bytes += n;
    head_ += n;
    offset_ += n;
}

std::vector<TelemetryFrame> StreamSplitter::feed(std::span<const uint8_t> bytes) {
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
    std::vector<TelemetryFrame> out;

    while (head_ < buf_.size()) {
        const size_t avail = buf_.size() - head_;
        if (buf_[head_] != kMagic) {
            auto next = std::find(buf_.begin() + static_cast<std::ptrdiff_t>(head_) + 1, buf_.end(), kMagic);
            discard(static_cast<size_t>(next - buf_.begin()) - head_);
            continue;
        }
        if (avail < kHeaderSize) break;
        const size_t len = buf_[head_ + 6];
        if (len > kMaxPayload) {
            discard(1);
            continue;
        }
        const size_t total = kHeaderSize + len + kTrailerSize;
        if (avail < total) break;

        auto result = decode(std::span<const uint8_t>(buf_).subspan(head_, total));
        if (auto* frame = std::get_if<TelemetryFrame>(&result)) {
            out.push_back(std::move(*frame));
            head_ += total;
            offset_ += total;
            ++delivered_;
            in_sync_ = true;
        } else {
            discard(1);
        }
    }

    if (head_ > 0 && (head_ == buf_.size() || head_ > 4096)) {
        buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(head_));
        head_ = 0;
    }
    return out;
}

SplitResult stream_split(std::span<const uint8_t> bytes) {
    StreamSplitter s;
    SplitResult r;
    r.frames = s.feed(bytes);
    r.resyncs = s.resyncs();
    r.pending_bytes = s.pending_bytes();
    return r;
}

}  // namespace respmon::wire
