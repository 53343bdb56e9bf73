#include "mbsim/frame.hpp"

#include <sstream>
#include <type_traits>

namespace mbsim {

const char* to_string(FrameKind k) {
    switch (k) {
        case FrameKind::Rts: return "RTS";
        case FrameKind::Cts: return "CTS";
        case FrameKind::SchRts: return "SCH/RTS";
        case FrameKind::SchCts: return "SCH/CTS";
        case FrameKind::Data: return "DATA";
        case FrameKind::Ack: return "ACK";
    }
    return "?";
}

bool is_sch(FrameKind k) { return k == FrameKind::SchRts || k == FrameKind::SchCts; }
bool is_control(FrameKind k) { return k != FrameKind::Data; }

std::uint32_t FrameSizes::of(FrameKind k) const {
    switch (k) {
        case FrameKind::Rts:
        case FrameKind::SchRts: return rts_bytes;
        case FrameKind::Cts:
        case FrameKind::SchCts: return cts_bytes;
        case FrameKind::Ack: return ack_bytes;
        case FrameKind::Data: return data_bytes;
    }
    return 0;
}

std::int64_t MacParams::eifs_us() const {
    return sifs_us + tx_duration(sizes.ack_bytes, data_rate_bps).count() / 1000 + difs_us;
}

SimTime tx_duration(std::uint32_t bytes, std::uint64_t rate_bps) {
    if (rate_bps == 0) {
        throw FrameError("data rate must be positive");
    }
    const std::uint64_t bits_ns = static_cast<std::uint64_t>(bytes) * 8ull * 1000000000ull;
    return SimTime::ns(static_cast<std::int64_t>((bits_ns + rate_bps - 1) / rate_bps));
}

std::int64_t nav_duration_us(FrameKind kind, const MacParams& p, bool jump_backoff) {
    auto air = [&](FrameKind k) { return tx_duration(p.sizes.of(k), p.data_rate_bps).count() / 1000; };
    switch (kind) {
        case FrameKind::Rts:
        case FrameKind::SchRts:
            return 3 * p.sifs_us + air(FrameKind::Cts) + air(FrameKind::Data) + air(FrameKind::Ack);
        case FrameKind::Cts:
            return 2 * p.sifs_us + air(FrameKind::Data) + air(FrameKind::Ack);
        case FrameKind::SchCts:
            return 2 * p.sifs_us + air(FrameKind::Data) + air(FrameKind::Ack) + (jump_backoff ? p.aifs_us : 0);
        case FrameKind::Data:
            return p.sifs_us + air(FrameKind::Ack);
        case FrameKind::Ack:
            return 0;
    }
    return 0;
}

Frame make_sch(const Frame& base) {
    Frame f = base;
    switch (base.kind) {
        case FrameKind::Rts: f.kind = FrameKind::SchRts; break;
        case FrameKind::Cts: f.kind = FrameKind::SchCts; break;
        default: throw FrameError(std::string("cannot derive an SCH frame from ") + to_string(base.kind));
    }
    return f;
}

namespace {

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    }
}

template <typename T>
T get(std::span<const std::uint8_t> in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) {
        throw FrameError("truncated frame record");
    }
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        u |= static_cast<U>(static_cast<U>(in[pos + i]) << (8 * i));
    }
    pos += sizeof(T);
    return static_cast<T>(u);
}

}  // namespace

void encode_append(const Frame& f, std::vector<std::uint8_t>& out) {
    std::vector<std::uint8_t> body;
    put(body, static_cast<std::uint8_t>(f.kind));
    put(body, f.tx_addr);
    put(body, f.rx_addr);
    put(body, f.final_dest_addr);
    put(body, f.origin_addr);
    put(body, f.duration_us);
    put(body, f.size_bytes);
    put(body, f.seq_no);
    put(body, f.tree_id);
    put(body, f.short_retry_count);
    put(body, f.long_retry_count);
    put(body, f.queue_index);
    put(body, f.antenna_index);
    put(body, f.created_ns);
    put(out, static_cast<std::uint32_t>(body.size()));
    out.insert(out.end(), body.begin(), body.end());
}

std::vector<std::uint8_t> encode(const Frame& f) {
    std::vector<std::uint8_t> out;
    encode_append(f, out);
    return out;
}

Frame decode(std::span<const std::uint8_t> bytes, std::size_t& offset) {
    std::size_t pos = offset;
    const auto len = get<std::uint32_t>(bytes, pos);
    const std::size_t end = pos + len;
    if (end > bytes.size()) {
        throw FrameError("frame record length exceeds buffer");
    }
    Frame f;
    const auto kind = get<std::uint8_t>(bytes, pos);
    if (kind > static_cast<std::uint8_t>(FrameKind::Ack)) {
        throw FrameError("unknown frame kind " + std::to_string(kind));
    }
    f.kind = static_cast<FrameKind>(kind);
    f.tx_addr = get<std::uint32_t>(bytes, pos);
    f.rx_addr = get<std::uint32_t>(bytes, pos);
    f.final_dest_addr = get<std::uint32_t>(bytes, pos);
    f.origin_addr = get<std::uint32_t>(bytes, pos);
    f.duration_us = get<std::int64_t>(bytes, pos);
    f.size_bytes = get<std::uint32_t>(bytes, pos);
    f.seq_no = get<std::uint32_t>(bytes, pos);
    f.tree_id = get<std::uint64_t>(bytes, pos);
    f.short_retry_count = get<std::uint8_t>(bytes, pos);
    f.long_retry_count = get<std::uint8_t>(bytes, pos);
    f.queue_index = get<std::uint8_t>(bytes, pos);
    f.antenna_index = get<std::uint8_t>(bytes, pos);
    f.created_ns = get<std::int64_t>(bytes, pos);
    if (pos != end) {
        throw FrameError("frame record length mismatch");
    }
    offset = end;
    return f;
}

std::string describe(const Frame& f) {
    std::ostringstream os;
    os << to_string(f.kind) << ' ' << f.tx_addr << "->" << f.rx_addr << " dst=" << f.final_dest_addr
       << " dur=" << f.duration_us << "us tree=" << f.tree_id;
    if (f.kind == FrameKind::Rts || f.kind == FrameKind::Data) {
        os << " src=" << static_cast<int>(f.short_retry_count) << " lrc=" << static_cast<int>(f.long_retry_count);
    }
    return os.str();
}

}  // namespace mbsim
