#pragma once

#include "qfc/propagation.hpp"

#include <span>
#include <vector>

namespace qfc {

// Spontaneous Raman parameters. background_ratio is the detuned-background
// to peak ratio; field integrals are precomputed mode-overlap scalars.
struct RamanParams {
    double peak_gain = 1.23e-9;        // g_R, m/W
    double solid_angle = 0.0662;       // sr
    double background_ratio = 0.127;   // rho_bg
    double peak_bandwidth = 0.0;       // Hz
    double molecular_density = 0.0;    // 1/m^3
    double phonon_frequency = 0.0;     // rad/s
    double temperature = 295.0;        // K
    double n_eff = 2.0;
    double n_rs = 3.1;
    double n_g = 3.5;
    double field_integral_4 = 0.0;     // 1/m^2 (normalised)
    double field_integral_2n = 1.0;    // dimensionless (normalised)
};

// Throws DomainError unless the parameters are positive and rho_bg <= 1.
void validate(const RamanParams& p);

// exp(-hbar omega_ph / (k_B T)).
double boltzmann_factor(double phonon_frequency, double temperature);

// Waveguide cross section from the bulk one:
// (n_RS^2 lambda_s lambda_p / 8 pi) (n_g I4 / I2n^2) sigma_bulk.
double effective_cross_section(const RamanParams& p, double lambda_signal, double lambda_pump,
                               double sigma_bulk);

// Gain form of the Raman flux [counts/s/Hz]:
// hbar omega_s^3 n_eff^2 (N0 + 1) / (8 pi c^2) * L rho_bg Omega g_R F_p,
// with F_p = P_p / (hbar omega_p).
double raman_flux(const RamanParams& p, double length, double pump_power, double lambda_pump,
                  double lambda_signal);

// Degenerate SFWM, (eta_nl P_p L)^2 [counts/s/Hz].
double sfwm_flux(double eta_nl, double pump_power, double length);

// Detuning roll-off of the SFWM flux: sinc^2(pi (2 detuning / bandwidth)^2),
// first null at detuning = bandwidth / 2.
double sfwm_envelope(double detuning, double bandwidth);

enum class EfficiencyProfile { Analytic, Integrated };

// F_U = (F_RS / L) int_0^L eta(z) dz by the trapezoid rule over `intervals`
// panels. Analytic uses the phase-matched closed form for a length-z
// waveguide; Integrated samples |c(z)|^2 from one disordered propagation.
double upconverted_noise(double raman_flux_measured, const WaveguideSpec& spec,
                         const PumpConfig& pump,
                         EfficiencyProfile profile = EfficiencyProfile::Analytic,
                         int intervals = 600);

struct PowerFlux {
    double pump_power = 0.0;  // W
    double flux = 0.0;        // counts/s/Hz
};

// Least-squares slope of log(flux) against log(P_p).
double fit_power_scaling(std::span<const PowerFlux> points);

// Linear (Raman) plus quadratic (SFWM) pump noise at one detuning.
struct NoiseModel {
    double linear_coefficient = 5e-3;  // counts/s/Hz per W
    double eta_nl = 200.0;             // 1/(W m)
    double length = 6e-3;              // m
    double sfwm_bandwidth = 30e-9;     // m, null to null
};

struct NoisePoint {
    double pump_power = 0.0;
    double linear = 0.0;
    double quadratic = 0.0;
    double total() const { return linear + quadratic; }
};

struct NoiseBudget {
    double detuning = 0.0;  // m
    std::vector<NoisePoint> points;
};

NoiseBudget noise_budget(const NoiseModel& model, double detuning,
                         std::span<const double> pump_powers);

}  // namespace qfc
