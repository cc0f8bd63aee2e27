#pragma once

#include "qfc/dispersion.hpp"
#include "qfc/propagation.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace qfc {

// Nanoheaters over contiguous, equal spans starting at `start`. Heater j
// shifts dk by response * V_j^2 over [start + j span, start + (j+1) span).
struct HeaterArray {
    double start = 0.0;          // m
    double span = 0.4e-3;        // m
    double response = 500.0;     // kappa_h, rad/m/V^2
    double v_max = 5.0;          // V
    std::vector<double> voltages;

    size_t count() const { return voltages.size(); }
    double shift(size_t j) const { return response * voltages[j] * voltages[j]; }
};

// Throws ActuationError for voltages outside [0, v_max] and DomainError
// when the spans leave [0, length] or do not align with `cell_size`.
void validate(const HeaterArray& heaters, double length, double cell_size);

// AR(1) disorder: x_n = rho x_{n-1} + sigma_step xi_n with
// rho = exp(-cell/correlation_length), x_0 drawn from the stationary law,
// sample mean removed.
struct DisorderSpec {
    std::uint64_t seed = 0;
    double cell_size = 20e-6;           // m
    double sigma_step = 0.0;            // rad/m
    double correlation_length = 0.4e-3; // m
};

MismatchProfile generate_disorder(const DisorderSpec& spec, double length);

// Expected value of the (1/N) sample variance of generate_disorder offsets.
double expected_disorder_variance(const DisorderSpec& spec, double length);

MismatchProfile apply_heaters(const MismatchProfile& profile, const HeaterArray& heaters);

struct TuneOptions {
    int passes = 2;
    bool residual_stage = true;
    double voltage_tolerance = 0.01;  // V, golden-section bracket width
    int coarse_points = 9;
    // Objective grid. A zero center solves the phase-matching condition; a
    // zero pitch uses B0/20.
    double center_wavelength = 0.0;
    double pitch = 0.0;
};

struct TuneStep {
    int stage = 0;  // 0..passes-1 peak sweeps, `passes` for the residual stage
    size_t heater = 0;
    double voltage = 0.0;
    double objective = 0.0;  // peak efficiency, or residual flux in the last stage
};

struct TuneResult {
    HeaterArray heaters;
    std::vector<TuneStep> history;  // accepted updates only, in order
    std::vector<double> grid;       // objective wavelengths
    double step = 0.0;              // integration step used on the grid
    double initial_objective = 0.0;
    double final_objective = 0.0;   // peak over grid after normalisation
};

// Sequential segment-by-segment tuning. Heaters start from a common bias
// V_max/sqrt(2) so that each can move dk both ways; SFG visits heaters from
// the traversal input end, DFG from the output end. Each visit is a coarse
// scan followed by golden-section refinement, accepted only on strict
// improvement. The optional last stage minimises the unconverted flux at the
// peak wavelength. Finally the smallest shift is removed from every heater,
// which translates the spectrum without changing its shape.
TuneResult sequential_tune(const WaveguideSpec& spec, const PumpConfig& pump,
                           const DispersionModel& dispersion, const HeaterArray& heaters,
                           const TuneOptions& options = {});

// Peak-efficiency objective on `grid` for the given heater state, evaluated
// through cached per-cell transfers. Exposed for testing against spectrum().
std::vector<double> tuner_spectrum(const WaveguideSpec& spec, const PumpConfig& pump,
                                   const DispersionModel& dispersion, const HeaterArray& heaters,
                                   std::span<const double> grid, double step);

struct CalibrationReport {
    double R = 0.0;
    double area = 0.0;               // m (efficiency x wavelength)
    double bandwidth = 0.0;          // measured FWHM, m
    double ideal_bandwidth = 0.0;    // B0, m
    double peak_efficiency = 0.0;
    double peak_wavelength = 0.0;
};

// Coverage: both edge samples must be below 1% of the peak.
CalibrationReport self_calibrated_R(const ConversionSpectrum& spectrum, double dispersion_factor,
                                    double length);

// Weak-probe SFG spectrum for calibration, centred where the mean offset is
// compensated. `half_span` is in rad/m of base mismatch (0: 200/L plus half
// the offset range); `pitch` is in wavelength (0: B0/20). The probe keeps
// the measurement in the undepleted, sinc^2-normalised regime regardless of
// the operating pump.
struct ProbeOptions {
    double probe_power = 1e-6;  // W
    double half_span = 0.0;     // rad/m
    double pitch = 0.0;         // m
};

ConversionSpectrum calibration_spectrum(const WaveguideSpec& spec,
                                        const DispersionModel& dispersion, double pump_wavelength,
                                        double center_wavelength, const ProbeOptions& options = {});

// calibration_spectrum followed by self_calibrated_R, with the dispersion
// factor re-evaluated at the measured peak (the spectrum's own
// phase-matching point).
CalibrationReport measure_calibration(const WaveguideSpec& spec,
                                      const DispersionModel& dispersion, double pump_wavelength,
                                      double center_wavelength, const ProbeOptions& options = {});

// B0 = 5.57 |D| / L in wavelength.
double ideal_bandwidth(double dispersion_factor, double length);

// Wavelength width -> frequency width at `wavelength`.
double bandwidth_to_hz(double width, double wavelength);

// eta_SFG / R.
double corrected_eta(double eta_measured, double R);

// Pump-induced thermal shift: P (uniform + gradient exp(-s/decay_length)),
// s measured from the pump input end. An infinite decay length makes the
// gradient term uniform.
struct DriftSpec {
    double uniform = 0.0;   // rad/m/W
    double gradient = 0.0;  // rad/m/W
    double decay_length = std::numeric_limits<double>::quiet_NaN();  // NaN: waveguide length
};

MismatchProfile thermal_drift(const MismatchProfile& profile, double pump_power,
                              const DriftSpec& drift, PumpDirection direction);

// Loss from the decay of per-segment SHG peaks:
// 10 log10(mean(P_i/P_{i+1})) / segment_length, returned in dB/cm.
double extract_loss_from_segment_shg(std::span<const double> peaks, double segment_length);

// beta = n_g omega / (c Q), power attenuation [1/m].
double loss_from_quality_factor(double group_index, double wavelength, double quality_factor);

}  // namespace qfc
