#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mbsim {

/// Raised for physically meaningless inputs (non-positive ranges, HPBWs...).
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

struct Position {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Position&, const Position&) = default;
};

/// Half-power beamwidths in degrees.
struct Hpbw {
    double azimuth_deg = 10.0;
    double elevation_deg = 10.0;
};

double to_db(double ratio);
double from_db(double db);
double watts_to_dbm(double watts);
double dbm_to_watts(double dbm);
double wavelength_m(double freq_hz);

/// 32400 / (az * el): planar-array approximation for a single main lobe.
double directivity_from_hpbw(Hpbw h);

/// G = e_cd * D.
double gain_from_directivity(double efficiency, double directivity);

/// Free-space received power in dBm from Pr/Pt = Gr Gt (lambda / 4 pi R)^2.
double friis_received_power_dbm(double pt_watts, double gt_db, double gr_db, double freq_hz,
                                double range_m);

struct Direction {
    double azimuth_deg;  ///< [0, 360), east = 0, counter-clockwise
    double range_m;
};

Direction direction_between(Position from, Position to);

/// Maps any angle into [0, 360).
double normalize_azimuth(double deg);

/// Smallest absolute difference between two azimuths, in [0, 180].
double azimuth_distance(double a, double b);

/// Polar x azimuth grid of gains in dB. Polar rows cover [0, 180] and azimuth
/// columns [0, 360) at the given steps.
class GainTable {
public:
    static constexpr std::string_view kHeader =
        "Polar (rows) and Azimuth (columns) values in degrees, gain cell values in dB.";

    GainTable(double polar_step_deg, double azimuth_step_deg, std::vector<double> cells);

    /// Single main lobe centred on (polar 90, boresight) with a flat floor.
    static GainTable single_lobe(Hpbw hpbw, double boresight_azimuth_deg, double main_lobe_db,
                                 double side_lobe_db, double step_deg = 5.0);

    static GainTable from_ascii(std::string_view text);
    std::string to_ascii() const;

    /// Nearest grid cell (rounding half-up); angles are normalised first.
    double lookup(double polar_deg, double azimuth_deg) const;

    double at(std::size_t row, std::size_t col) const { return cells_[row * cols_ + col]; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double polar_step() const { return polar_step_; }
    double azimuth_step() const { return azimuth_step_; }
    double max_gain_db() const;
    double min_gain_db() const;

    /// Circular mean of the azimuth columns holding the maximum gain on the
    /// 90 degree polar row.
    double main_lobe_azimuth() const;

    friend bool operator==(const GainTable&, const GainTable&) = default;

private:
    double polar_step_;
    double azimuth_step_;
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> cells_;
};

struct Beam {
    std::size_t index = 0;
    double boresight_azimuth_deg = 0.0;
    double hpbw_azimuth_deg = 10.0;

    bool covers(double azimuth_deg) const;
};

/// The beam whose main lobe (boresight +/- HPBW/2) contains the arrival
/// direction, or nullopt if it only hits side-lobe floor.
std::optional<std::size_t> beam_for_arrival(std::span<const Beam> beams, double doa_azimuth_deg);

/// Throws InvalidParameter if any two main lobes overlap.
void check_beams_disjoint(std::span<const Beam> beams);

}  // namespace mbsim
