#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbsim/time.hpp"

namespace mbsim {

using Address = std::uint32_t;
inline constexpr Address kNoAddress = 0xffffffffu;

enum class FrameKind : std::uint8_t { Rts, Cts, SchRts, SchCts, Data, Ack };

const char* to_string(FrameKind k);
bool is_sch(FrameKind k);
bool is_control(FrameKind k);

struct FrameSizes {
    std::uint32_t rts_bytes = 20;
    std::uint32_t cts_bytes = 14;
    std::uint32_t ack_bytes = 14;
    std::uint32_t data_bytes = 512;

    std::uint32_t of(FrameKind k) const;
    friend bool operator==(const FrameSizes&, const FrameSizes&) = default;
};

/// One MAC frame. Control frames copy the identity fields of the data frame
/// they negotiate for.
struct Frame {
    FrameKind kind = FrameKind::Data;
    Address tx_addr = kNoAddress;
    Address rx_addr = kNoAddress;
    Address final_dest_addr = kNoAddress;
    Address origin_addr = kNoAddress;
    std::int64_t duration_us = 0;
    std::uint32_t size_bytes = 0;
    std::uint32_t seq_no = 0;
    std::uint64_t tree_id = 0;
    std::uint8_t short_retry_count = 0;
    std::uint8_t long_retry_count = 0;
    std::uint8_t queue_index = 1;    ///< 1..4
    std::uint8_t antenna_index = 0;  ///< arrival beam, set by the receiver
    std::int64_t created_ns = 0;     ///< creation time at the originating source

    friend bool operator==(const Frame&, const Frame&) = default;
};

/// MAC/PHY timing constants. All durations in microseconds.
struct MacParams {
    std::int64_t slot_us = 20;
    std::int64_t difs_us = 50;
    std::int64_t sifs_us = 10;
    std::int64_t aifs_us = 20;
    std::uint32_t cw_min = 15;
    std::uint32_t cw_max = 1023;
    std::uint32_t short_retry_limit = 7;
    std::uint32_t long_retry_limit = 4;
    std::uint64_t data_rate_bps = 1000000;
    FrameSizes sizes{};

    /// SIFS + ACK airtime + DIFS.
    std::int64_t eifs_us() const;

    friend bool operator==(const MacParams&, const MacParams&) = default;
};

class FrameError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Airtime of `bytes` at `rate_bps`, rounded up to whole nanoseconds.
SimTime tx_duration(std::uint32_t bytes, std::uint64_t rate_bps);
inline SimTime tx_duration(const Frame& f, std::uint64_t rate_bps) {
    return tx_duration(f.size_bytes, rate_bps);
}

/// NAV value carried by a frame of `kind`: the rest of the four-way exchange
/// after it. With `jump_backoff`, SCH/CTS additionally reserves AIFS.
std::int64_t nav_duration_us(FrameKind kind, const MacParams& p, bool jump_backoff = false);

/// RTS -> SCH/RTS, CTS -> SCH/CTS; every other field unchanged.
Frame make_sch(const Frame& base);

/// Debug wire format: u32 little-endian record length followed by the frame
/// fields in declaration order, each little-endian.
std::vector<std::uint8_t> encode(const Frame& f);
void encode_append(const Frame& f, std::vector<std::uint8_t>& out);
/// Decodes one record starting at `offset`, advancing it past the record.
Frame decode(std::span<const std::uint8_t> bytes, std::size_t& offset);

std::string describe(const Frame& f);

}  // namespace mbsim
