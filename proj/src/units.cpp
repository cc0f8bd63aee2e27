#include "qfc/units.hpp"

#include "qfc/error.hpp"

#include <array>
#include <charconv>
#include <string>

namespace qfc::units {

namespace {

struct UnitEntry {
    Quantity quantity;
    std::string_view tag;
    double factor;
};

constexpr double kDbPerCm = std::numbers::ln10 / 10.0 * 100.0;
constexpr double kDbPerM = std::numbers::ln10 / 10.0;

constexpr std::array kUnits{
    UnitEntry{Quantity::Dimensionless, "", 1.0},
    UnitEntry{Quantity::Dimensionless, "%", 0.01},
    UnitEntry{Quantity::Length, "m", 1.0},
    UnitEntry{Quantity::Length, "cm", cm},
    UnitEntry{Quantity::Length, "mm", mm},
    UnitEntry{Quantity::Length, "um", um},
    UnitEntry{Quantity::Length, "µm", um},
    UnitEntry{Quantity::Length, "nm", nm},
    UnitEntry{Quantity::Power, "W", 1.0},
    UnitEntry{Quantity::Power, "mW", mW},
    UnitEntry{Quantity::Power, "uW", 1e-6},
    UnitEntry{Quantity::Attenuation, "1/m", 1.0},
    UnitEntry{Quantity::Attenuation, "1/cm", 100.0},
    UnitEntry{Quantity::Attenuation, "dB/cm", kDbPerCm},
    UnitEntry{Quantity::Attenuation, "dB/m", kDbPerM},
    UnitEntry{Quantity::Wavenumber, "rad/m", 1.0},
    UnitEntry{Quantity::Wavenumber, "rad/mm", 1e3},
    UnitEntry{Quantity::Wavenumber, "rad/cm", 1e2},
    UnitEntry{Quantity::NormalizedEfficiency, "1/W/m^2", 1.0},
    UnitEntry{Quantity::NormalizedEfficiency, "1/W/cm^2", 1e4},
    UnitEntry{Quantity::NormalizedEfficiency, "%/W/cm^2", 1e2},
    UnitEntry{Quantity::NonlinearCoefficient, "1/W/m", 1.0},
    UnitEntry{Quantity::NonlinearCoefficient, "1/W/cm", 1e2},
    UnitEntry{Quantity::Voltage, "V", 1.0},
    UnitEntry{Quantity::Voltage, "mV", 1e-3},
    UnitEntry{Quantity::HeaterResponse, "rad/m/V^2", 1.0},
    UnitEntry{Quantity::HeaterResponse, "rad/mm/V^2", 1e3},
    UnitEntry{Quantity::DriftCoefficient, "rad/m/W", 1.0},
    UnitEntry{Quantity::DriftCoefficient, "rad/m/mW", 1e3},
    UnitEntry{Quantity::Frequency, "Hz", 1.0},
    UnitEntry{Quantity::Frequency, "GHz", 1e9},
    UnitEntry{Quantity::Frequency, "THz", 1e12},
    UnitEntry{Quantity::AngularFrequency, "rad/s", 1.0},
    UnitEntry{Quantity::Temperature, "K", 1.0},
    UnitEntry{Quantity::RamanGain, "m/W", 1.0},
    UnitEntry{Quantity::RamanGain, "cm/W", 1e-2},
    UnitEntry{Quantity::SolidAngle, "sr", 1.0},
    UnitEntry{Quantity::Angle, "rad", 1.0},
    UnitEntry{Quantity::Angle, "deg", pi / 180.0},
    UnitEntry{Quantity::InverseArea, "1/m^2", 1.0},
    UnitEntry{Quantity::InverseArea, "1/um^2", 1e12},
    UnitEntry{Quantity::Area, "m^2", 1.0},
    UnitEntry{Quantity::Area, "um^2", 1e-12},
    UnitEntry{Quantity::InversePower, "1/W", 1.0},
    UnitEntry{Quantity::InversePower, "1/mW", 1e3},
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string_view quantity_name(Quantity q) {
    switch (q) {
        case Quantity::Dimensionless: return "dimensionless";
        case Quantity::Length: return "length";
        case Quantity::Power: return "power";
        case Quantity::Attenuation: return "attenuation";
        case Quantity::Wavenumber: return "wavenumber";
        case Quantity::NormalizedEfficiency: return "normalized efficiency";
        case Quantity::NonlinearCoefficient: return "nonlinear coefficient";
        case Quantity::Voltage: return "voltage";
        case Quantity::HeaterResponse: return "heater response";
        case Quantity::DriftCoefficient: return "drift coefficient";
        case Quantity::Frequency: return "frequency";
        case Quantity::AngularFrequency: return "angular frequency";
        case Quantity::Temperature: return "temperature";
        case Quantity::RamanGain: return "Raman gain";
        case Quantity::SolidAngle: return "solid angle";
        case Quantity::Angle: return "angle";
        case Quantity::InverseArea: return "inverse area";
        case Quantity::Area: return "area";
        case Quantity::InversePower: return "inverse power";
    }
    return "unknown";
}

std::string_view si_unit(Quantity q) {
    for (const auto& e : kUnits) {
        if (e.quantity == q && e.factor == 1.0) return e.tag;
    }
    return "";
}

double unit_factor(Quantity q, std::string_view unit) {
    unit = trim(unit);
    for (const auto& e : kUnits) {
        if (e.quantity == q && e.tag == unit) return e.factor;
    }
    // A bare number is taken as SI for every quantity.
    if (unit.empty()) return 1.0;
    throw ConfigError("unknown unit '" + std::string(unit) + "' for " +
                      std::string(quantity_name(q)));
}

double parse_quantity(Quantity q, std::string_view text) {
    text = trim(text);
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{}) {
        throw ConfigError("cannot parse number from '" + std::string(text) + "'");
    }
    return value * unit_factor(q, std::string_view(ptr, static_cast<size_t>(last - ptr)));
}

}  // namespace qfc::units
