#include "mbsim/trace.hpp"

#include <sstream>

namespace mbsim {

const char* to_string(TraceKind k) {
    switch (k) {
        case TraceKind::RxBegin: return "RX_BEGIN";
        case TraceKind::RxEnd: return "RX_END";
        case TraceKind::RxStatus: return "RX_STATUS";
        case TraceKind::State: return "STATE";
        case TraceKind::TxFrame: return "TX";
        case TraceKind::RxFrame: return "RX";
        case TraceKind::NavSet: return "NAV";
        case TraceKind::Flag: return "FLAG";
        case TraceKind::TimeoutCancel: return "TIMEOUT_CANCEL";
        case TraceKind::TimeoutFire: return "TIMEOUT";
        case TraceKind::Drop: return "DROP";
        case TraceKind::Sink: return "SINK";
        case TraceKind::Enqueue: return "ENQ";
    }
    return "?";
}

std::string TraceRecord::line() const {
    std::ostringstream os;
    os << at.count() << " n" << node << ' ' << to_string(kind) << " b" << beam;
    if (has_frame) {
        os << ' ' << to_string(frame_kind);
    }
    if (peer != kNoAddress) {
        os << " peer=" << peer;
    }
    os << " v=" << value;
    if (!detail.empty()) {
        os << ' ' << detail;
    }
    return os.str();
}

void Trace::emit(TraceRecord r) {
    if (callback_) callback_(r);
    if (stream_ != nullptr) {
        *stream_ << r.line() << '\n';
    }
    if (keep_) {
        records_.push_back(std::move(r));
    }
}

}  // namespace mbsim
