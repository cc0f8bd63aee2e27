#pragma once

#include "qfc/dispersion.hpp"

#include <complex>
#include <span>
#include <vector>

namespace qfc {

using Complex = std::complex<double>;

// Piecewise-constant phase-mismatch offsets dk(z) [rad/m] on cells of equal
// size. The cells tile [0, L] exactly.
struct MismatchProfile {
    double cell_size = 0.0;
    std::vector<double> offsets;

    double length() const { return cell_size * static_cast<double>(offsets.size()); }
    double max_abs_offset() const;

    static MismatchProfile uniform(double length, size_t cells, double offset = 0.0);
};

struct WaveguideSpec {
    double length = 0.0;     // m
    double loss_1550 = 0.0;  // alpha, power attenuation [1/m]
    double loss_780 = 0.0;   // beta, power attenuation [1/m]
    double eta_sfg = 0.0;    // weak-pump normalized SFG efficiency [1/(W m^2)]
    MismatchProfile profile;
};

// Throws DomainError when L <= 0, losses or eta are negative, or the
// profile does not tile [0, L].
void validate(const WaveguideSpec& spec);

enum class PumpDirection { Forward, Backward };
enum class Process { SFG, DFG };

std::string_view to_string(PumpDirection d);
std::string_view to_string(Process p);

struct PumpConfig {
    double power = 0.0;       // W
    double wavelength = 0.0;  // m
    PumpDirection direction = PumpDirection::Forward;
    Process process = Process::SFG;
};

// b: 1550-band amplitude, c: 780-band amplitude; |b|^2 and |c|^2 are photon
// fluxes. z is the physical position along the waveguide.
struct FieldState {
    Complex b{1.0, 0.0};
    Complex c{0.0, 0.0};
    double z = 0.0;
};

struct SpectrumSample {
    double wavelength = 0.0;  // signal (1550-band) wavelength, m
    double efficiency = 0.0;
};

struct ConversionSpectrum {
    Process process = Process::SFG;
    PumpDirection direction = PumpDirection::Forward;
    double pump_power = 0.0;
    std::vector<SpectrumSample> samples;

    // Sample with the largest efficiency. Throws PreconditionError when empty.
    const SpectrumSample& peak() const;
};

// g = sqrt(eta_sfg * P_p / 2) [1/m].
double coupling_rate(double eta_sfg, double pump_power);

// Largest admissible integration step:
// min(0.1/g, 0.1/max|dk|, 0.1/max(alpha, beta), L/100). `base_mismatch` is
// added to every profile offset.
double max_step(const WaveguideSpec& spec, const PumpConfig& pump, double base_mismatch = 0.0);

// 2x2 map acting on (b, c~), where c~ = c exp(-i phi(z)) is the 780-band
// amplitude in the frame co-rotating with the accumulated mismatch phase
// phi(z) = int_0^z dk. In that frame each cell is a constant-coefficient
// linear system.
struct Transfer {
    Complex bb{1.0}, bc{0.0}, cb{0.0}, cc{1.0};

    static Transfer identity() { return {}; }
};

Transfer operator*(const Transfer& lhs, const Transfer& rhs);

// One classical RK4 step of length h for d/dz (b, c~) = A (b, c~) with
// A = [[-alpha/2, -i g], [-i g, -i dk - beta/2]]. For a linear autonomous
// system the four RK stages collapse to the degree-4 Taylor polynomial of
// h A, which is what this returns.
Transfer rk4_step(double g, double dk, double alpha, double beta, double h);

// rk4_step applied `substeps` times over one cell.
Transfer rk4_cell(double g, double dk, double alpha, double beta, double cell_length,
                  int substeps);

int substeps_for(double cell_length, double step);

// Fixed-step RK4 integration of the lossy coupled-mode equations through
// the profile. Forward traverses cells 0..N-1 starting at z = 0; Backward
// traverses N-1..0 starting at z = L. `base_mismatch` adds a uniform dk
// (the dispersion-derived mismatch at the current wavelengths).
FieldState integrate(const WaveguideSpec& spec, const PumpConfig& pump, const FieldState& input,
                     double step, double base_mismatch = 0.0);

// Same as integrate but returns the state after every step (input first).
std::vector<FieldState> integrate_trace(const WaveguideSpec& spec, const PumpConfig& pump,
                                        const FieldState& input, double step,
                                        double base_mismatch = 0.0);

// sin^2(sqrt(x))/x continued to x < 0 as sinh^2(sqrt(-x))/(-x); equals 1 at 0.
double sinc2_continued(double x);

// Photon-flux conversion efficiency of a phase-matched waveguide with
// negligible pump loss, continued analytically through the overdamped branch
// 8 eta P < (beta - alpha)^2.
double analytic_efficiency(double eta_sfg, double pump_power, double length, double alpha,
                           double beta);

struct PeakPoint {
    double efficiency = 0.0;
    double pump_power = 0.0;
};

// Operating point where the sine argument reaches pi/2.
PeakPoint peak_efficiency(double eta_sfg, double length, double alpha, double beta);

// Efficiency spectrum over signal wavelengths. Each sample integrates with
// unit input in the process's source band (b for SFG, c for DFG) and
// reports the converted flux. A non-positive `step` picks half of max_step
// evaluated at each wavelength.
ConversionSpectrum spectrum(const WaveguideSpec& spec, const PumpConfig& pump,
                            const DispersionModel& dispersion, std::span<const double> grid,
                            double step = 0.0);

// Converted fraction for a single base mismatch (no dispersion lookup).
double conversion_efficiency(const WaveguideSpec& spec, const PumpConfig& pump,
                             double base_mismatch, double step);

struct CurvePoint {
    double pump_power = 0.0;  // W
    double efficiency = 0.0;
};

struct CurveFit {
    double eta_sfg = 0.0;
    int iterations = 0;
    double residual = 0.0;  // sum of squared residuals
};

// Least-squares fit of the phase-matched efficiency model over eta_sfg.
CurveFit fit_efficiency_curve(std::span<const CurvePoint> points, double length, double alpha,
                              double beta);

// eta_max / (P_p L^2), in 1/(W m^2).
double loss_normalized_efficiency(double eta_max, double pump_power, double length);

}  // namespace qfc
