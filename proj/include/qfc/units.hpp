#pragma once

#include <numbers>
#include <string>
#include <string_view>

// Physical constants and the unit policy. Everything inside the library is
// SI: m, W, s, rad/m, and power attenuation in 1/m. Quantities with other
// units are converted once, at the configuration / CSV boundary.
namespace qfc::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double speed_of_light = 299792458.0;       // m/s
inline constexpr double hbar = 1.054571817e-34;             // J s
inline constexpr double boltzmann = 1.380649e-23;           // J/K

inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;
inline constexpr double mm = 1e-3;
inline constexpr double cm = 1e-2;
inline constexpr double mW = 1e-3;

// dB of power per metre -> power attenuation coefficient [1/m].
constexpr double db_to_attenuation(double db_per_m) {
    return db_per_m * std::numbers::ln10 / 10.0;
}
constexpr double attenuation_to_db(double per_m) {
    return per_m * 10.0 / std::numbers::ln10;
}

// 70,000 %/W/cm^2 = 700 W^-1 cm^-2 = 7e6 W^-1 m^-2.
constexpr double percent_per_w_cm2_to_si(double v) { return v / 100.0 * 1e4; }

enum class Quantity {
    Dimensionless,
    Length,
    Power,
    Attenuation,        // 1/m (power)
    Wavenumber,         // rad/m
    NormalizedEfficiency,  // 1/(W m^2)
    NonlinearCoefficient,  // 1/(W m)
    Voltage,
    HeaterResponse,     // rad/m/V^2
    DriftCoefficient,   // rad/m/W
    Frequency,          // Hz
    AngularFrequency,   // rad/s
    Temperature,
    RamanGain,          // m/W
    SolidAngle,
    Angle,              // rad
    InverseArea,        // 1/m^2
    Area,               // m^2
    InversePower,       // 1/W
};

std::string_view quantity_name(Quantity q);

// Tag of the SI unit used when emitting `q` ("" for dimensionless).
std::string_view si_unit(Quantity q);

// Factor that converts a value tagged with `unit` into SI for quantity `q`.
// Throws ConfigError when the tag is unknown or belongs to another quantity.
double unit_factor(Quantity q, std::string_view unit);

// Parses "6 mm", "20 dB/cm", "70000 %/W/cm^2", or a bare number (SI).
double parse_quantity(Quantity q, std::string_view text);

}  // namespace qfc::units
