#pragma once

#include <array>
#include <string_view>
#include <utility>
#include <vector>

namespace qfc {

// The three interacting modes: the 1550-band signal, the 1550-band pump and
// the 780-band sum-frequency mode.
enum class ModeLabel { TE1550, Pump1550, TM780 };

std::string_view to_string(ModeLabel label);

// n_eff(lambda) = sum_i c_i (lambda - lambda_ref)^i, valid on [lambda_min, lambda_max].
struct ModeDispersion {
    ModeLabel label = ModeLabel::TE1550;
    double reference_wavelength = 0.0;  // m
    std::vector<double> coefficients;   // c_i in 1/m^i
    double lambda_min = 0.0;            // m
    double lambda_max = 0.0;            // m

    double evaluate(double lambda) const;
};

struct DispersionModel {
    std::array<ModeDispersion, 3> modes;  // indexed by ModeLabel
    double group_index_780 = 5.7;
    // (d dk / d lambda_signal)^-1 at the phase-matching point, m per (rad/m).
    double dispersion_factor = 0.0;

    const ModeDispersion& mode(ModeLabel label) const {
        return modes[static_cast<size_t>(label)];
    }
};

// Throws DomainError if the model does not hold exactly one entry per label
// in canonical order, or if any index is <= 1 at its window edges.
void validate(const DispersionModel& model);

double effective_index(const DispersionModel& model, ModeLabel mode, double lambda);

// Frequency matching: 1/lambda_sum = 1/lambda_signal + 1/lambda_pump.
double sum_wavelength(double lambda_signal, double lambda_pump);

// dk = 2 pi (n_sum/lambda_sum - n_signal/lambda_signal - n_pump/lambda_pump), rad/m.
double phase_mismatch(const DispersionModel& model, double lambda_signal, double lambda_pump);

// Bisection over signal wavelength until |dk| < 1e-3 rad/m. When the
// mismatch vanishes identically the first midpoint is returned.
double solve_phase_matching(const DispersionModel& model, double lambda_pump,
                            std::pair<double, double> bracket);

inline constexpr double kPhaseMatchTolerance = 1e-3;  // rad/m

// Central finite difference of dk with respect to the signal wavelength.
double mismatch_slope(const DispersionModel& model, double lambda_signal, double lambda_pump);

// Inverse of mismatch_slope at the phase-matching point.
double compute_dispersion_factor(const DispersionModel& model, double lambda_pump,
                                 double lambda_signal);

// Linear-index fixture with the phase-matching root placed exactly at
// (lambda_signal, lambda_pump). The signal and pump modes share one
// polynomial with index `n_1550` at the pump wavelength and group index
// `group_index_1550`; the sum mode has group index `group_index_780`.
// These are synthetic coefficients, not fitted material data.
DispersionModel make_linear_fixture(double lambda_signal, double lambda_pump,
                                    double n_1550 = 2.0, double group_index_1550 = 3.5,
                                    double group_index_780 = 5.7);

// All three modes at the same constant index, windows wide open.
DispersionModel make_constant_fixture(double index);

}  // namespace qfc
