#include <doctest.h>

#include <string>

#include "prop.hpp"
#include "respmon/errors.hpp"
#include "respmon/wire.hpp"

using namespace respmon;
using namespace respmon::wire;

namespace {

// Bit-at-a-time CRC-8, polynomial x^8 + x^2 + x + 1.
uint8_t crc8_bitwise(const uint8_t* p, size_t n) {
    uint8_t crc = 0;
    for (size_t i = 0; i < n; ++i) {
        crc ^= p[i];
        for (int b = 0; b < 8; ++b) crc = (crc & 0x80) ? static_cast<uint8_t>((crc << 1) ^ 0x07) : static_cast<uint8_t>(crc << 1);
    }
    return crc;
}

TelemetryFrame random_frame(prop::Gen& g) {
    TelemetryFrame f;
    f.seq = static_cast<uint16_t>(g.integer(0, 0xFFFF));
    f.flags = static_cast<uint8_t>(g.integer(0, 3));
    switch (g.integer(0, 2)) {
        case 0: {
            FsrBatchPayload p;
            p.t0_ms = static_cast<uint32_t>(g.integer(0, 0xFFFFFFFF));
            const auto n = g.integer(1, 119);
            for (int64_t i = 0; i < n; ++i) p.codes.push_back(static_cast<uint16_t>(g.integer(0, 4095)));
            f.payload = p;
            break;
        }
        case 1: {
            AccelBatchPayload p;
            p.t0_ms = static_cast<uint32_t>(g.integer(0, 0xFFFFFFFF));
            const auto n = g.integer(1, 39);
            for (int64_t i = 0; i < n; ++i)
                p.samples.push_back({static_cast<int16_t>(g.integer(-32768, 32767)),
                                     static_cast<int16_t>(g.integer(-32768, 32767)),
                                     static_cast<int16_t>(g.integer(-32768, 32767))});
            f.payload = p;
            break;
        }
        default:
            f.payload = BatteryStatusPayload{static_cast<uint32_t>(g.integer(0, 0xFFFFFFFF)),
                                             static_cast<uint16_t>(g.integer(0, 4095)),
                                             static_cast<uint8_t>(g.integer(0, 100))};
    }
    return f;
}

std::vector<uint8_t> concat(const std::vector<TelemetryFrame>& frames) {
    std::vector<uint8_t> out;
    for (const auto& f : frames) encode_append(f, out);
    return out;
}

}  // namespace

TEST_CASE("table CRC matches the bitwise definition") {
    const std::string check = "123456789";
    const auto* p = reinterpret_cast<const uint8_t*>(check.data());
    CHECK(crc8({p, check.size()}) == 0xF4);
    CHECK(crc8_bitwise(p, check.size()) == 0xF4);

    prop::Gen g(31);
    for (int i = 0; i < 2000; ++i) {
        std::vector<uint8_t> buf(static_cast<size_t>(g.integer(0, 300)));
        for (auto& b : buf) b = static_cast<uint8_t>(g.integer(0, 255));
        REQUIRE(crc8(buf) == crc8_bitwise(buf.data(), buf.size()));
    }
}

TEST_CASE("battery frame layout") {
    TelemetryFrame f{0, 0, BatteryStatusPayload{2000, 3822, 100}};
    const auto b = encode(f);
    const std::vector<uint8_t> body = {0x01, 0x03, 0x00, 0x00, 0x00, 0x07,
                                       0xD0, 0x07, 0x00, 0x00,  // t = 2000
                                       0xEE, 0x0E,              // code = 3822
                                       0x64};                   // 100 %
    std::vector<uint8_t> expected = {0xA5};
    expected.insert(expected.end(), body.begin(), body.end());
    expected.push_back(crc8_bitwise(body.data(), body.size()));
    CHECK(b == expected);
    CHECK(b.size() == 15);
}

TEST_CASE("minimal FSR frame has a 7-byte payload") {
    const auto b = encode({1, 0, FsrBatchPayload{0, {123}}});
    CHECK(b[0] == kMagic);
    CHECK(b[6] == 7);
    CHECK(b.size() == kHeaderSize + 7 + kTrailerSize);
}

TEST_CASE("encode rejects invalid payloads") {
    CHECK_THROWS_AS(encode({0, 0, FsrBatchPayload{0, {}}}), InvalidParameter);
    CHECK_THROWS_AS(encode({0, 0, FsrBatchPayload{0, {4096}}}), InvalidParameter);
    CHECK_THROWS_AS(encode({0, 0, FsrBatchPayload{0, std::vector<uint16_t>(120, 1)}}), InvalidParameter);
    CHECK_THROWS_AS(encode({0, 0, AccelBatchPayload{0, std::vector<AccelTriple>(40)}}), InvalidParameter);
    CHECK_THROWS_AS(encode({0, 0, BatteryStatusPayload{0, 100, 101}}), InvalidParameter);
    CHECK_NOTHROW(encode({0, 0, FsrBatchPayload{0, std::vector<uint16_t>(119, 1)}}));
    CHECK(encode({0, 0, FsrBatchPayload{0, std::vector<uint16_t>(119, 1)}}).size() == 8 + 243);
}

TEST_CASE("decode error cases") {
    CHECK(std::get<DecodeError>(decode({})) == DecodeError::Truncated);
    auto b = encode({7, 0, BatteryStatusPayload{1, 2, 3}});
    CHECK(std::get<DecodeError>(decode(std::span(b).first(b.size() - 1))) == DecodeError::Truncated);

    auto bad = b;
    bad[0] = 0x00;
    CHECK(std::get<DecodeError>(decode(bad)) == DecodeError::BadMagic);

    bad = b;
    bad[1] = 0x02;
    bad.back() = crc8(std::span(bad).subspan(1, bad.size() - 2));
    CHECK(std::get<DecodeError>(decode(bad)) == DecodeError::BadVersion);

    bad = b;
    bad[2] = 0x09;
    bad.back() = crc8(std::span(bad).subspan(1, bad.size() - 2));
    CHECK(std::get<DecodeError>(decode(bad)) == DecodeError::UnknownKind);

    bad = b;
    bad.back() ^= 0x01;
    CHECK(std::get<DecodeError>(decode(bad)) == DecodeError::BadCrc);

    bad = b;
    bad.push_back(0);
    CHECK(std::get<DecodeError>(decode(bad)) == DecodeError::LengthMismatch);
}

TEST_CASE("random frames round-trip byte-exactly") {
    prop::Gen g(32);
    for (int i = 0; i < 10'000; ++i) {
        const auto f = random_frame(g);
        const auto b = encode(f);
        REQUIRE(b.size() == kHeaderSize + payload_size(f.payload) + kTrailerSize);
        REQUIRE(b.size() <= kMaxFrameSize);
        REQUIRE(b[0] == kMagic);
        const auto r = decode(b);
        REQUIRE(std::holds_alternative<TelemetryFrame>(r));
        REQUIRE(std::get<TelemetryFrame>(r) == f);
        REQUIRE(encode(std::get<TelemetryFrame>(r)) == b);
    }
}

TEST_CASE("every single-bit corruption is rejected") {
    prop::Gen g(33);
    for (int i = 0; i < 300; ++i) {
        const auto b = encode(random_frame(g));
        for (size_t bit = 0; bit < b.size() * 8; ++bit) {
            auto c = b;
            c[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
            REQUIRE(std::holds_alternative<DecodeError>(decode(c)));
        }
    }
}

TEST_CASE("stream splitting") {
    prop::Gen g(34);
    std::vector<TelemetryFrame> frames;
    for (int i = 0; i < 50; ++i) frames.push_back(random_frame(g));
    const auto stream = concat(frames);

    SUBCASE("clean concatenation") {
        const auto r = stream_split(stream);
        CHECK(r.frames == frames);
        CHECK(r.resyncs.empty());
        CHECK(r.pending_bytes == 0);
    }

    SUBCASE("garbage between two frames") {
        auto a = encode(frames[0]);
        const auto b = encode(frames[1]);
        const size_t garbage_at = a.size();
        a.insert(a.end(), {0x13, 0x37, 0x42});
        a.insert(a.end(), b.begin(), b.end());
        const auto r = stream_split(a);
        REQUIRE(r.frames.size() == 2);
        CHECK(r.frames[0] == frames[0]);
        CHECK(r.frames[1] == frames[1]);
        REQUIRE(r.resyncs.size() == 1);
        CHECK(r.resyncs[0].offset == garbage_at);
        CHECK(r.resyncs[0].skipped_bytes == 3);
    }

    SUBCASE("cut mid-frame") {
        const auto a = encode(frames[0]);
        auto cut = a;
        const auto b = encode(frames[1]);
        cut.insert(cut.end(), b.begin(), b.begin() + 4);
        const auto r = stream_split(cut);
        CHECK(r.frames.size() == 1);
        CHECK(r.pending_bytes == 4);
        CHECK(r.resyncs.empty());
    }

    SUBCASE("every prefix yields a prefix of the frames") {
        for (size_t n = 0; n <= stream.size(); n += 7) {
            const auto r = stream_split(std::span(stream).first(n));
            REQUIRE(r.frames.size() <= frames.size());
            for (size_t i = 0; i < r.frames.size(); ++i) REQUIRE(r.frames[i] == frames[i]);
            REQUIRE(r.resyncs.empty());
        }
    }

    SUBCASE("chunked feeding matches a single pass") {
        StreamSplitter s;
        std::vector<TelemetryFrame> got;
        size_t pos = 0;
        while (pos < stream.size()) {
            const size_t n = std::min<size_t>(static_cast<size_t>(g.integer(1, 40)), stream.size() - pos);
            auto out = s.feed(std::span(stream).subspan(pos, n));
            got.insert(got.end(), out.begin(), out.end());
            pos += n;
        }
        CHECK(got == frames);
        CHECK(s.frames_delivered() == frames.size());
    }

    SUBCASE("random garbage injection never delivers a bad frame") {
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<uint8_t> noisy;
            std::vector<TelemetryFrame> sent;
            for (int i = 0; i < 10; ++i) {
                if (g.coin()) {
                    const auto n = g.integer(1, 20);
                    for (int64_t k = 0; k < n; ++k) noisy.push_back(static_cast<uint8_t>(g.integer(0, 255)));
                }
                const auto& f = frames[static_cast<size_t>(g.integer(0, 49))];
                encode_append(f, noisy);
                sent.push_back(f);
            }
            const auto r = stream_split(noisy);
            // Each delivered frame must be one of the frames that was sent.
            for (const auto& f : r.frames)
                REQUIRE(std::find(sent.begin(), sent.end(), f) != sent.end());
            // Garbage may swallow at most the frame right after it.
            REQUIRE(r.frames.size() + r.resyncs.size() >= sent.size());
        }
    }
}

TEST_CASE("empty stream") {
    const auto r = stream_split({});
    CHECK(r.frames.empty());
    CHECK(r.resyncs.empty());
    CHECK(r.pending_bytes == 0);
}
