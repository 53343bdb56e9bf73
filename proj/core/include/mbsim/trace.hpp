#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "mbsim/frame.hpp"
#include "mbsim/time.hpp"

namespace mbsim {

enum class TraceKind : std::uint8_t {
    // PHY
    RxBegin,
    RxEnd,
    RxStatus,
    // MAC
    State,
    TxFrame,
    RxFrame,
    NavSet,
    Flag,
    TimeoutCancel,
    TimeoutFire,
    Drop,
    Sink,
    Enqueue,
};

const char* to_string(TraceKind k);

/// One trace line. `beam` is -1 when not applicable.
struct TraceRecord {
    SimTime at;
    std::uint32_t node = 0;
    TraceKind kind = TraceKind::State;
    int beam = -1;
    FrameKind frame_kind = FrameKind::Data;
    bool has_frame = false;
    Address peer = kNoAddress;
    std::int64_t value = 0;
    std::string detail;

    /// Stable single-line rendering: "<ns> n<node> <KIND> b<beam> <frame> peer=<p> v=<value> <detail>".
    std::string line() const;
};

/// Collects trace records in memory and/or streams them as lines.
class Trace {
public:
    using Callback = std::function<void(const TraceRecord&)>;

    bool enabled() const { return keep_ || stream_ != nullptr || callback_; }
    void keep_records(bool on) { keep_ = on; }
    void stream_to(std::ostream* os) { stream_ = os; }
    void on_record(Callback cb) { callback_ = std::move(cb); }

    void emit(TraceRecord r);
    const std::vector<TraceRecord>& records() const { return records_; }
    void clear() { records_.clear(); }

private:
    bool keep_ = false;
    std::ostream* stream_ = nullptr;
    Callback callback_;
    std::vector<TraceRecord> records_;
};

}  // namespace mbsim
