#include "qfc/noise.hpp"

#include "qfc/error.hpp"
#include "qfc/units.hpp"

#include <cmath>

namespace qfc {

using units::hbar;
using units::pi;
using units::speed_of_light;

void validate(const RamanParams& p) {
    const double positive[] = {p.peak_gain, p.solid_angle, p.background_ratio, p.temperature,
                               p.n_eff,     p.n_rs,        p.n_g};
    for (double v : positive) {
        if (!(v > 0.0)) throw DomainError("Raman parameters must be positive");
    }
    if (p.background_ratio > 1.0) throw DomainError("Raman background ratio must be <= 1");
    if (p.phonon_frequency < 0.0) throw DomainError("phonon frequency must be >= 0");
}

double boltzmann_factor(double phonon_frequency, double temperature) {
    if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
    return std::exp(-hbar * phonon_frequency / (units::boltzmann * temperature));
}

double effective_cross_section(const RamanParams& p, double lambda_signal, double lambda_pump,
                               double sigma_bulk) {
    const double prefactor = p.n_rs * p.n_rs * lambda_signal * lambda_pump / (8.0 * pi);
    const double overlap = p.n_g * p.field_integral_4 / (p.field_integral_2n * p.field_integral_2n);
    return prefactor * overlap * sigma_bulk;
}

double raman_flux(const RamanParams& p, double length, double pump_power, double lambda_pump,
                  double lambda_signal) {
    validate(p);
    const double omega_s = 2.0 * pi * speed_of_light / lambda_signal;
    const double omega_p = 2.0 * pi * speed_of_light / lambda_pump;
    const double n0 = boltzmann_factor(p.phonon_frequency, p.temperature);
    const double pump_flux = pump_power / (hbar * omega_p);
    const double spectral = hbar * std::pow(omega_s, 3) * p.n_eff * p.n_eff * (n0 + 1.0) /
                            (8.0 * pi * speed_of_light * speed_of_light);
    return spectral * length * p.background_ratio * p.solid_angle * p.peak_gain * pump_flux;
}

double sfwm_flux(double eta_nl, double pump_power, double length) {
    const double x = eta_nl * pump_power * length;
    return x * x;
}

double sfwm_envelope(double detuning, double bandwidth) {
    const double r = 2.0 * detuning / bandwidth;
    const double u = pi * r * r;
    if (u < 1e-8) return 1.0;
    const double s = std::sin(u) / u;
    return s * s;
}

double upconverted_noise(double raman_flux_measured, const WaveguideSpec& spec,
                         const PumpConfig& pump, EfficiencyProfile profile, int intervals) {
    if (!(raman_flux_measured >= 0.0)) throw PreconditionError("F_RS must be >= 0");
    if (raman_flux_measured == 0.0) return 0.0;
    const double L = spec.length;
    std::vector<double> z, eta;
    if (profile == EfficiencyProfile::Analytic) {
        if (intervals < 1) throw PreconditionError("need at least one quadrature interval");
        for (int i = 0; i <= intervals; ++i) {
            z.push_back(L * i / intervals);
            eta.push_back(analytic_efficiency(spec.eta_sfg, pump.power, z.back(), spec.loss_1550,
                                              spec.loss_780));
        }
    } else {
        PumpConfig sfg = pump;
        sfg.process = Process::SFG;
        FieldState in;
        in.z = sfg.direction == PumpDirection::Forward ? 0.0 : L;
        for (const auto& st : integrate_trace(spec, sfg, in, 0.5 * max_step(spec, sfg))) {
            // Distance travelled from the input face.
            z.push_back(std::abs(st.z - in.z));
            eta.push_back(std::norm(st.c));
        }
    }
    double integral = 0.0;
    for (size_t i = 1; i < z.size(); ++i) {
        integral += 0.5 * (eta[i] + eta[i - 1]) * (z[i] - z[i - 1]);
    }
    return raman_flux_measured / L * integral;
}

double fit_power_scaling(std::span<const PowerFlux> points) {
    if (points.size() < 3) throw DataError("power-scaling fit needs at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (!(p.pump_power > 0.0) || !(p.flux > 0.0)) {
            throw DataError("power-scaling point " + std::to_string(i) +
                            " has a nonpositive pump power or flux");
        }
        const double x = std::log(p.pump_power), y = std::log(p.flux);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(points.size());
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) throw DataError("power-scaling fit needs distinct pump powers");
    return (n * sxy - sx * sy) / denom;
}

NoiseBudget noise_budget(const NoiseModel& model, double detuning,
                         std::span<const double> pump_powers) {
    NoiseBudget out{detuning, {}};
    const double envelope = sfwm_envelope(detuning, model.sfwm_bandwidth);
    for (double p : pump_powers) {
        if (!(p >= 0.0)) throw PreconditionError("pump power must be >= 0");
        out.points.push_back(
            {p, model.linear_coefficient * p, sfwm_flux(model.eta_nl, p, model.length) * envelope});
    }
    return out;
}

}  // namespace qfc
