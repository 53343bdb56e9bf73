#include "mbsim/antenna.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace mbsim {

namespace {

constexpr double kAngleEps = 1e-9;

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view s) {
    double v = 0.0;
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw InvalidParameter("gain table: bad number '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::size_t grid_count(double span, double step) {
    return static_cast<std::size_t>(std::llround(span / step));
}

}  // namespace

double to_db(double ratio) { return 10.0 * std::log10(ratio); }
double from_db(double db) { return std::pow(10.0, db / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts * 1e3); }
double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) / 1e3; }

double wavelength_m(double freq_hz) {
    if (!(freq_hz > 0.0)) {
        throw InvalidParameter("frequency must be positive");
    }
    return kSpeedOfLight / freq_hz;
}

double directivity_from_hpbw(Hpbw h) {
    if (!(h.azimuth_deg > 0.0) || !(h.elevation_deg > 0.0) || h.azimuth_deg > 360.0 ||
        h.elevation_deg > 360.0) {
        throw InvalidParameter("HPBW must lie in (0, 360] degrees");
    }
    return 32400.0 / (h.azimuth_deg * h.elevation_deg);
}

double gain_from_directivity(double efficiency, double directivity) {
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
        throw InvalidParameter("radiation efficiency must lie in [0, 1]");
    }
    return efficiency * directivity;
}

double friis_received_power_dbm(double pt_watts, double gt_db, double gr_db, double freq_hz,
                                double range_m) {
    if (!(pt_watts > 0.0)) {
        throw InvalidParameter("transmit power must be positive");
    }
    if (!(range_m > 0.0)) {
        throw InvalidParameter("range must be positive (no near-field model)");
    }
    const double lambda = wavelength_m(freq_hz);
    const double path = lambda / (4.0 * kPi * range_m);
    const double ratio = from_db(gt_db) * from_db(gr_db) * path * path;
    return watts_to_dbm(pt_watts * ratio);
}

double normalize_azimuth(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    if (r >= 360.0) r -= 360.0;
    return r;
}

double azimuth_distance(double a, double b) {
    const double d = std::fabs(normalize_azimuth(a) - normalize_azimuth(b));
    return d > 180.0 ? 360.0 - d : d;
}

Direction direction_between(Position from, Position to) {
    const double dx = to.x - from.x;
    const double dy = to.y - from.y;
    const double range = std::hypot(dx, dy);
    if (range == 0.0) {
        throw InvalidParameter("direction between coincident positions");
    }
    return Direction{normalize_azimuth(std::atan2(dy, dx) * 180.0 / kPi), range};
}

GainTable::GainTable(double polar_step_deg, double azimuth_step_deg, std::vector<double> cells)
    : polar_step_(polar_step_deg), azimuth_step_(azimuth_step_deg) {
    if (!(polar_step_deg > 0.0) || !(azimuth_step_deg > 0.0)) {
        throw InvalidParameter("gain table steps must be positive");
    }
    rows_ = grid_count(180.0, polar_step_deg) + 1;
    cols_ = grid_count(360.0, azimuth_step_deg);
    if (cells.size() != rows_ * cols_) {
        throw InvalidParameter("gain table has " + std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(rows_ * cols_));
    }
    cells_ = std::move(cells);
}

GainTable GainTable::single_lobe(Hpbw hpbw, double boresight_azimuth_deg, double main_lobe_db,
                                 double side_lobe_db, double step_deg) {
    directivity_from_hpbw(hpbw);  // validates
    const std::size_t rows = grid_count(180.0, step_deg) + 1;
    const std::size_t cols = grid_count(360.0, step_deg);
    std::vector<double> cells(rows * cols, side_lobe_db);
    for (std::size_t r = 0; r < rows; ++r) {
        const double polar = static_cast<double>(r) * step_deg;
        if (std::fabs(polar - 90.0) > hpbw.elevation_deg / 2.0 + kAngleEps) continue;
        for (std::size_t c = 0; c < cols; ++c) {
            const double az = static_cast<double>(c) * step_deg;
            if (azimuth_distance(az, boresight_azimuth_deg) <= hpbw.azimuth_deg / 2.0 + kAngleEps) {
                cells[r * cols + c] = main_lobe_db;
            }
        }
    }
    return GainTable(step_deg, step_deg, std::move(cells));
}

double GainTable::lookup(double polar_deg, double azimuth_deg) const {
    const double polar = std::clamp(polar_deg, 0.0, 180.0);
    const double az = normalize_azimuth(azimuth_deg);
    auto row = static_cast<std::size_t>(std::floor(polar / polar_step_ + 0.5));
    auto col = static_cast<std::size_t>(std::floor(az / azimuth_step_ + 0.5));
    row = std::min(row, rows_ - 1);
    if (col >= cols_) col = 0;  // 357.5+ rounds onto the 360 == 0 column
    return at(row, col);
}

double GainTable::max_gain_db() const { return *std::max_element(cells_.begin(), cells_.end()); }
double GainTable::min_gain_db() const { return *std::min_element(cells_.begin(), cells_.end()); }

double GainTable::main_lobe_azimuth() const {
    const auto row = std::min(static_cast<std::size_t>(std::llround(90.0 / polar_step_)), rows_ - 1);
    double best = at(row, 0);
    for (std::size_t c = 1; c < cols_; ++c) best = std::max(best, at(row, c));
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
        if (at(row, c) == best) {
            const double a = static_cast<double>(c) * azimuth_step_ * kPi / 180.0;
            sx += std::cos(a);
            sy += std::sin(a);
        }
    }
    return normalize_azimuth(std::atan2(sy, sx) * 180.0 / kPi);
}

std::string GainTable::to_ascii() const {
    std::ostringstream os;
    os << kHeader << '\n';
    for (std::size_t c = 0; c < cols_; ++c) {
        os << '\t' << format_number(static_cast<double>(c) * azimuth_step_);
    }
    os << '\n';
    for (std::size_t r = 0; r < rows_; ++r) {
        os << format_number(static_cast<double>(r) * polar_step_);
        for (std::size_t c = 0; c < cols_; ++c) {
            os << '\t' << format_number(at(r, c));
        }
        os << '\n';
    }
    return os.str();
}

GainTable GainTable::from_ascii(std::string_view text) {
    std::vector<std::string_view> lines;
    for (auto line : split(text, '\n')) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.size() < 3 || lines[0] != kHeader) {
        throw InvalidParameter("gain table: missing header line");
    }
    auto head = split(lines[1], '\t');
    if (head.size() < 3 || !head[0].empty()) {
        throw InvalidParameter("gain table: malformed azimuth header row");
    }
    std::vector<double> azimuths;
    for (std::size_t i = 1; i < head.size(); ++i) azimuths.push_back(parse_number(head[i]));
    const double az_step = azimuths[1] - azimuths[0];

    std::vector<double> polars;
    std::vector<double> cells;
    for (std::size_t l = 2; l < lines.size(); ++l) {
        auto fields = split(lines[l], '\t');
        if (fields.size() != azimuths.size() + 1) {
            throw InvalidParameter("gain table: row " + std::to_string(l + 1) + " has " +
                                   std::to_string(fields.size() - 1) + " cells");
        }
        polars.push_back(parse_number(fields[0]));
        for (std::size_t i = 1; i < fields.size(); ++i) cells.push_back(parse_number(fields[i]));
    }
    if (polars.size() < 2) {
        throw InvalidParameter("gain table: need at least two polar rows");
    }
    const double polar_step = polars[1] - polars[0];
    for (std::size_t i = 0; i < azimuths.size(); ++i) {
        if (std::fabs(azimuths[i] - static_cast<double>(i) * az_step) > kAngleEps) {
            throw InvalidParameter("gain table: azimuth columns are not evenly spaced from 0");
        }
    }
    for (std::size_t i = 0; i < polars.size(); ++i) {
        if (std::fabs(polars[i] - static_cast<double>(i) * polar_step) > kAngleEps) {
            throw InvalidParameter("gain table: polar rows are not evenly spaced from 0");
        }
    }
    return GainTable(polar_step, az_step, std::move(cells));
}

bool Beam::covers(double azimuth_deg) const {
    return azimuth_distance(azimuth_deg, boresight_azimuth_deg) <= hpbw_azimuth_deg / 2.0 + kAngleEps;
}

std::optional<std::size_t> beam_for_arrival(std::span<const Beam> beams, double doa_azimuth_deg) {
    for (const auto& b : beams) {
        if (b.covers(doa_azimuth_deg)) {
            return b.index;
        }
    }
    return std::nullopt;
}

void check_beams_disjoint(std::span<const Beam> beams) {
    for (std::size_t i = 0; i < beams.size(); ++i) {
        for (std::size_t j = i + 1; j < beams.size(); ++j) {
            const double sep = azimuth_distance(beams[i].boresight_azimuth_deg, beams[j].boresight_azimuth_deg);
            const double need = (beams[i].hpbw_azimuth_deg + beams[j].hpbw_azimuth_deg) / 2.0;
            if (sep < need - kAngleEps) {
                throw InvalidParameter("main lobes of beams " + std::to_string(beams[i].index) + " and " +
                                       std::to_string(beams[j].index) + " overlap (" +
                                       std::to_string(sep) + " deg apart)");
            }
        }
    }
}

}  // namespace mbsim
