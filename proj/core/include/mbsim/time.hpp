#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>

namespace mbsim {

/// Simulation clock value in integer nanoseconds since the start of a run.
/// Also used for durations; every microsecond-scale MAC timing is exact.
class SimTime {
public:
    constexpr SimTime() = default;

    static constexpr SimTime ns(std::int64_t v) { return SimTime(v); }
    static constexpr SimTime us(std::int64_t v) { return SimTime(v * 1000); }
    static constexpr SimTime ms(std::int64_t v) { return SimTime(v * 1000000); }
    static constexpr SimTime sec(std::int64_t v) { return SimTime(v * 1000000000); }
    /// Rounds to the nearest nanosecond.
    static SimTime seconds(double s) { return SimTime(static_cast<std::int64_t>(std::llround(s * 1e9))); }
    static constexpr SimTime max() { return SimTime(std::numeric_limits<std::int64_t>::max()); }

    constexpr std::int64_t count() const { return ns_; }
    constexpr double to_us() const { return static_cast<double>(ns_) / 1e3; }
    constexpr double to_seconds() const { return static_cast<double>(ns_) / 1e9; }

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime operator+(SimTime o) const { return SimTime(ns_ + o.ns_); }
    constexpr SimTime operator-(SimTime o) const { return SimTime(ns_ - o.ns_); }
    constexpr SimTime operator*(std::int64_t k) const { return SimTime(ns_ * k); }
    constexpr std::int64_t operator/(SimTime o) const { return ns_ / o.ns_; }
    constexpr SimTime& operator+=(SimTime o) { ns_ += o.ns_; return *this; }
    constexpr SimTime& operator-=(SimTime o) { ns_ -= o.ns_; return *this; }

private:
    constexpr explicit SimTime(std::int64_t v) : ns_(v) {}
    std::int64_t ns_ = 0;
};

std::string to_string(SimTime t);

}  // namespace mbsim
