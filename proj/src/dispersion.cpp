#include "qfc/dispersion.hpp"

#include "qfc/error.hpp"
#include "qfc/units.hpp"

#include <cmath>
#include <sstream>

namespace qfc {

std::string_view to_string(ModeLabel label) {
    switch (label) {
        case ModeLabel::TE1550: return "TE1550";
        case ModeLabel::Pump1550: return "Pump1550";
        case ModeLabel::TM780: return "TM780";
    }
    return "?";
}

double ModeDispersion::evaluate(double lambda) const {
    if (!(lambda >= lambda_min && lambda <= lambda_max)) {
        std::ostringstream msg;
        msg << "wavelength " << lambda / units::nm << " nm outside the validity window ["
            << lambda_min / units::nm << ", " << lambda_max / units::nm << "] nm of mode "
            << to_string(label);
        throw DomainError(msg.str());
    }
    const double x = lambda - reference_wavelength;
    double n = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) n = n * x + *it;
    return n;
}

void validate(const DispersionModel& model) {
    for (size_t i = 0; i < model.modes.size(); ++i) {
        const auto& m = model.modes[i];
        if (static_cast<size_t>(m.label) != i) {
            throw DomainError("dispersion model must hold TE1550, Pump1550, TM780 in order");
        }
        if (m.coefficients.empty()) {
            throw DomainError("mode " + std::string(to_string(m.label)) + " has no coefficients");
        }
        if (!(m.lambda_min < m.lambda_max)) {
            throw DomainError("mode " + std::string(to_string(m.label)) +
                              " has an empty validity window");
        }
        for (double edge : {m.lambda_min, m.lambda_max}) {
            if (!(m.evaluate(edge) > 1.0)) {
                throw DomainError("mode " + std::string(to_string(m.label)) +
                                  " has effective index <= 1 inside its window");
            }
        }
    }
}

double effective_index(const DispersionModel& model, ModeLabel mode, double lambda) {
    return model.mode(mode).evaluate(lambda);
}

double sum_wavelength(double lambda_signal, double lambda_pump) {
    return 1.0 / (1.0 / lambda_signal + 1.0 / lambda_pump);
}

double phase_mismatch(const DispersionModel& model, double lambda_signal, double lambda_pump) {
    const double lambda_sum = sum_wavelength(lambda_signal, lambda_pump);
    const double n_sum = model.mode(ModeLabel::TM780).evaluate(lambda_sum);
    const double n_sig = model.mode(ModeLabel::TE1550).evaluate(lambda_signal);
    const double n_pump = model.mode(ModeLabel::Pump1550).evaluate(lambda_pump);
    return 2.0 * units::pi *
           (n_sum / lambda_sum - n_sig / lambda_signal - n_pump / lambda_pump);
}

double solve_phase_matching(const DispersionModel& model, double lambda_pump,
                            std::pair<double, double> bracket) {
    double lo = std::min(bracket.first, bracket.second);
    double hi = std::max(bracket.first, bracket.second);
    double f_lo = phase_mismatch(model, lo, lambda_pump);
    const double f_hi = phase_mismatch(model, hi, lambda_pump);
    if (f_lo * f_hi > 0.0) {
        std::ostringstream msg;
        msg << "phase mismatch does not change sign over [" << lo / units::nm << ", "
            << hi / units::nm << "] nm (dk = " << f_lo << ", " << f_hi << " rad/m)";
        throw RootNotBracketedError(msg.str());
    }
    // Midpoint first, so an identically vanishing mismatch returns the
    // bracket centre rather than an endpoint.
    for (int iter = 0; iter < 400; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = phase_mismatch(model, mid, lambda_pump);
        if (std::abs(f_mid) < kPhaseMatchTolerance) return mid;
        if (mid <= lo || mid >= hi) break;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    for (double end : {lo, hi}) {
        if (std::abs(phase_mismatch(model, end, lambda_pump)) < kPhaseMatchTolerance) return end;
    }
    throw NumericalFailure("bisection exhausted double precision before |dk| < 1e-3 rad/m");
}

double mismatch_slope(const DispersionModel& model, double lambda_signal, double lambda_pump) {
    const double h = 1e-12;  // 1 pm
    return (phase_mismatch(model, lambda_signal + h, lambda_pump) -
            phase_mismatch(model, lambda_signal - h, lambda_pump)) /
           (2.0 * h);
}

double compute_dispersion_factor(const DispersionModel& model, double lambda_pump,
                                 double lambda_signal) {
    const double slope = mismatch_slope(model, lambda_signal, lambda_pump);
    if (slope == 0.0) throw DomainError("phase mismatch is flat; dispersion factor undefined");
    return 1.0 / slope;
}

DispersionModel make_linear_fixture(double lambda_signal, double lambda_pump, double n_1550,
                                    double group_index_1550, double group_index_780) {
    // For a linear n(lambda) = c0 + c1 (lambda - ref) the group index
    // n - lambda dn/dlambda is the constant c0 - ref * c1.
    const double c1_1550 = (n_1550 - group_index_1550) / lambda_pump;
    ModeDispersion te{ModeLabel::TE1550, lambda_pump, {n_1550, c1_1550}, 1400 * units::nm,
                      1700 * units::nm};
    ModeDispersion pump = te;
    pump.label = ModeLabel::Pump1550;

    const double lambda_sum = sum_wavelength(lambda_signal, lambda_pump);
    const double n_sig = te.evaluate(lambda_signal);
    const double n_pump = pump.evaluate(lambda_pump);
    const double n_sum = lambda_sum * (n_sig / lambda_signal + n_pump / lambda_pump);
    const double c1_780 = (n_sum - group_index_780) / lambda_sum;
    ModeDispersion tm{ModeLabel::TM780, lambda_sum, {n_sum, c1_780}, 700 * units::nm,
                      850 * units::nm};

    DispersionModel model{{te, pump, tm}, group_index_780, 0.0};
    model.dispersion_factor = compute_dispersion_factor(model, lambda_pump, lambda_signal);
    return model;
}

DispersionModel make_constant_fixture(double index) {
    auto mode = [index](ModeLabel label, double ref) {
        return ModeDispersion{label, ref, {index}, 100 * units::nm, 10000 * units::nm};
    };
    return DispersionModel{{mode(ModeLabel::TE1550, 1550 * units::nm),
                            mode(ModeLabel::Pump1550, 1550 * units::nm),
                            mode(ModeLabel::TM780, 775 * units::nm)},
                           5.7, 0.0};
}

}  // namespace qfc
