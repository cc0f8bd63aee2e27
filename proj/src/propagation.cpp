#include "qfc/propagation.hpp"

#include "qfc/error.hpp"
#include "qfc/units.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qfc {

namespace {

constexpr Complex kI{0.0, 1.0};

Transfer scaled(const Transfer& t, Complex s) {
    return {t.bb * s, t.bc * s, t.cb * s, t.cc * s};
}

Transfer plus_identity(const Transfer& t) {
    return {t.bb + 1.0, t.bc, t.cb, t.cc + 1.0};
}

void apply(const Transfer& t, Complex& b, Complex& c) {
    const Complex nb = t.bb * b + t.bc * c;
    const Complex nc = t.cb * b + t.cc * c;
    b = nb;
    c = nc;
}

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Cell indices in traversal order.
template <typename Fn>
void for_each_cell(const MismatchProfile& profile, PumpDirection direction, Fn&& fn) {
    const size_t n = profile.offsets.size();
    for (size_t k = 0; k < n; ++k) {
        fn(direction == PumpDirection::Forward ? k : n - 1 - k);
    }
}

double tolerance_ratio() { return 1.0 + 1e-12; }

void check_step(const WaveguideSpec& spec, const PumpConfig& pump, double step,
                double base_mismatch) {
    const double cap = max_step(spec, pump, base_mismatch);
    if (!(step > 0.0) || step > cap * tolerance_ratio()) {
        std::ostringstream msg;
        msg << "integration step " << step << " m violates the stability cap " << cap << " m";
        throw StepSizeError(msg.str());
    }
}

}  // namespace

double MismatchProfile::max_abs_offset() const {
    double m = 0.0;
    for (double v : offsets) m = std::max(m, std::abs(v));
    return m;
}

MismatchProfile MismatchProfile::uniform(double length, size_t cells, double offset) {
    return {length / static_cast<double>(cells), std::vector<double>(cells, offset)};
}

void validate(const WaveguideSpec& spec) {
    if (!(spec.length > 0.0)) throw DomainError("waveguide length must be positive");
    if (!(spec.loss_1550 >= 0.0) || !(spec.loss_780 >= 0.0)) {
        throw DomainError("waveguide losses must be non-negative");
    }
    if (!(spec.eta_sfg >= 0.0)) throw DomainError("normalized SFG efficiency must be >= 0");
    if (spec.profile.offsets.empty() || !(spec.profile.cell_size > 0.0)) {
        throw DomainError("mismatch profile is empty");
    }
    if (std::abs(spec.profile.length() - spec.length) > 1e-9 * spec.length) {
        std::ostringstream msg;
        msg << "mismatch profile covers " << spec.profile.length() << " m but the waveguide is "
            << spec.length << " m long";
        throw DomainError(msg.str());
    }
}

std::string_view to_string(PumpDirection d) {
    return d == PumpDirection::Forward ? "forward" : "backward";
}

std::string_view to_string(Process p) { return p == Process::SFG ? "sfg" : "dfg"; }

const SpectrumSample& ConversionSpectrum::peak() const {
    if (samples.empty()) throw PreconditionError("empty spectrum has no peak");
    return *std::max_element(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
        return a.efficiency < b.efficiency;
    });
}

double coupling_rate(double eta_sfg, double pump_power) {
    return std::sqrt(eta_sfg * pump_power / 2.0);
}

double max_step(const WaveguideSpec& spec, const PumpConfig& pump, double base_mismatch) {
    const double inf = std::numeric_limits<double>::infinity();
    const double g = coupling_rate(spec.eta_sfg, pump.power);
    double max_dk = 0.0;
    for (double v : spec.profile.offsets) max_dk = std::max(max_dk, std::abs(v + base_mismatch));
    const double max_loss = std::max(spec.loss_1550, spec.loss_780);
    double cap = spec.length / 100.0;
    cap = std::min(cap, g > 0.0 ? 0.1 / g : inf);
    cap = std::min(cap, max_dk > 0.0 ? 0.1 / max_dk : inf);
    cap = std::min(cap, max_loss > 0.0 ? 0.1 / max_loss : inf);
    return cap;
}

Transfer operator*(const Transfer& l, const Transfer& r) {
    return {l.bb * r.bb + l.bc * r.cb, l.bb * r.bc + l.bc * r.cc,
            l.cb * r.bb + l.cc * r.cb, l.cb * r.bc + l.cc * r.cc};
}

Transfer rk4_step(double g, double dk, double alpha, double beta, double h) {
    const Transfer x{Complex(-0.5 * alpha * h, 0.0), -kI * g * h, -kI * g * h,
                     Complex(-0.5 * beta * h, -dk * h)};
    // I + X (I + X/2 (I + X/3 (I + X/4)))
    Transfer acc = plus_identity(scaled(x, 0.25));
    acc = plus_identity(scaled(x * acc, 1.0 / 3.0));
    acc = plus_identity(scaled(x * acc, 0.5));
    return plus_identity(x * acc);
}

Transfer rk4_cell(double g, double dk, double alpha, double beta, double cell_length,
                  int substeps) {
    Transfer base = rk4_step(g, dk, alpha, beta, cell_length / substeps);
    Transfer result = Transfer::identity();
    for (int n = substeps; n > 0; n >>= 1) {
        if (n & 1) result = result * base;
        if (n > 1) base = base * base;
    }
    return result;
}

int substeps_for(double cell_length, double step) {
    return std::max(1, static_cast<int>(std::ceil(cell_length / step * (1.0 - 1e-12))));
}

namespace {

template <typename Observer>
FieldState integrate_impl(const WaveguideSpec& spec, const PumpConfig& pump,
                          const FieldState& input, double step, double base_mismatch,
                          Observer&& observe) {
    validate(spec);
    check_step(spec, pump, step, base_mismatch);
    const bool forward = pump.direction == PumpDirection::Forward;
    const double z0 = forward ? 0.0 : spec.length;
    if (std::abs(input.z - z0) > 1e-9 * spec.length) {
        throw PreconditionError(forward ? "forward input must be given at z = 0"
                                        : "backward input must be given at z = L");
    }
    const double g = coupling_rate(spec.eta_sfg, pump.power);
    const double cell = spec.profile.cell_size;
    const int n = substeps_for(cell, step);
    const double h = cell / n;
    const double sign = forward ? 1.0 : -1.0;

    Complex b = input.b;
    Complex c = input.c;  // c~ == c at the entry face, phi = 0 there
    double phase = 0.0;
    double z = z0;
    for_each_cell(spec.profile, pump.direction, [&](size_t k) {
        const double dk = spec.profile.offsets[k] + base_mismatch;
        const Transfer m = rk4_step(g, dk, spec.loss_1550, spec.loss_780, h);
        for (int s = 0; s < n; ++s) {
            apply(m, b, c);
            z += sign * h;
            observe(b, c, phase + dk * h * (s + 1), z);
        }
        phase += dk * cell;
    });
    FieldState out{b, c * std::exp(kI * phase), forward ? spec.length : 0.0};
    if (!finite(out.b) || !finite(out.c)) {
        throw NumericalFailure("coupled-mode integration produced a non-finite field");
    }
    return out;
}

}  // namespace

FieldState integrate(const WaveguideSpec& spec, const PumpConfig& pump, const FieldState& input,
                     double step, double base_mismatch) {
    return integrate_impl(spec, pump, input, step, base_mismatch,
                          [](Complex, Complex, double, double) {});
}

std::vector<FieldState> integrate_trace(const WaveguideSpec& spec, const PumpConfig& pump,
                                        const FieldState& input, double step,
                                        double base_mismatch) {
    std::vector<FieldState> trace{input};
    integrate_impl(spec, pump, input, step, base_mismatch,
                   [&](Complex b, Complex c, double phase, double z) {
                       trace.push_back({b, c * std::exp(kI * phase), z});
                   });
    return trace;
}

double sinc2_continued(double x) {
    if (std::abs(x) < 1e-6) return 1.0 - x / 3.0 + 2.0 * x * x / 45.0;
    if (x > 0.0) {
        const double u = std::sqrt(x);
        const double s = std::sin(u);
        return s * s / x;
    }
    const double y = std::sqrt(-x);
    const double s = std::sinh(y);
    return s * s / (-x);
}

double analytic_efficiency(double eta_sfg, double pump_power, double length, double alpha,
                           double beta) {
    const double drive = 8.0 * eta_sfg * pump_power;  // = 16 g^2
    const double x = (drive - (beta - alpha) * (beta - alpha)) * length * length / 16.0;
    const double decay = -(alpha + beta) * length / 2.0;
    if (x < -400.0) {
        // sinh^2(y) ~ e^{2y}/4; fold the growth into the decay exponent.
        const double y = std::sqrt(-x);
        return drive / 16.0 * length * length * std::exp(decay + 2.0 * y) / (4.0 * -x);
    }
    return drive / 16.0 * length * length * std::exp(decay) * sinc2_continued(x);
}

PeakPoint peak_efficiency(double eta_sfg, double length, double alpha, double beta) {
    if (!(eta_sfg > 0.0) || !(length > 0.0)) {
        throw PreconditionError("peak efficiency needs eta_sfg > 0 and L > 0");
    }
    const double k = 2.0 * units::pi / length;
    const double p = (k * k + (beta - alpha) * (beta - alpha)) / (8.0 * eta_sfg);
    return {analytic_efficiency(eta_sfg, p, length, alpha, beta), p};
}

double conversion_efficiency(const WaveguideSpec& spec, const PumpConfig& pump,
                             double base_mismatch, double step) {
    const bool forward = pump.direction == PumpDirection::Forward;
    FieldState in;
    in.z = forward ? 0.0 : spec.length;
    if (pump.process == Process::SFG) {
        in.b = 1.0;
        in.c = 0.0;
    } else {
        in.b = 0.0;
        in.c = 1.0;
    }
    const FieldState out = integrate(spec, pump, in, step, base_mismatch);
    return pump.process == Process::SFG ? std::norm(out.c) : std::norm(out.b);
}

ConversionSpectrum spectrum(const WaveguideSpec& spec, const PumpConfig& pump,
                            const DispersionModel& dispersion, std::span<const double> grid,
                            double step) {
    for (size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw PreconditionError("spectrum wavelength grid must be strictly increasing");
        }
    }
    ConversionSpectrum out{pump.process, pump.direction, pump.power, {}};
    out.samples.reserve(grid.size());
    for (double lambda : grid) {
        const double dk = phase_mismatch(dispersion, lambda, pump.wavelength);
        const double h = step > 0.0 ? step : 0.5 * max_step(spec, pump, dk);
        out.samples.push_back({lambda, conversion_efficiency(spec, pump, dk, h)});
    }
    return out;
}

CurveFit fit_efficiency_curve(std::span<const CurvePoint> points, double length, double alpha,
                              double beta) {
    if (points.size() < 4) {
        throw PreconditionError("efficiency-curve fit needs at least 4 points");
    }
    const CurvePoint* lowest = nullptr;
    for (const auto& p : points) {
        if (!(p.pump_power >= 0.0) || !std::isfinite(p.efficiency)) {
            throw PreconditionError("efficiency-curve points must be finite with P_p >= 0");
        }
        if (p.pump_power > 0.0 && p.efficiency > 0.0 &&
            (lowest == nullptr || p.pump_power < lowest->pump_power)) {
            lowest = &p;
        }
    }
    if (lowest == nullptr) throw PreconditionError("no point with positive power and efficiency");

    auto model = [&](double eta, double p) {
        return analytic_efficiency(eta, p, length, alpha, beta);
    };
    auto sse = [&](double eta) {
        double s = 0.0;
        for (const auto& p : points) {
            const double r = model(eta, p.pump_power) - p.efficiency;
            s += r * r;
        }
        return s;
    };

    // Small-signal slope of the lowest-power point: eta ~ (eta_sfg P/2) L^2 e^{..} f(.).
    const double small_signal = 0.5 * lowest->pump_power * length * length *
                                std::exp(-(alpha + beta) * length / 2.0) *
                                sinc2_continued(-(beta - alpha) * (beta - alpha) * length *
                                                length / 16.0);
    double eta = lowest->efficiency / small_signal;
    double cost = sse(eta);
    double damping = 1e-3;

    // Levenberg-Marquardt on the single parameter.
    for (int iter = 1; iter <= 10000; ++iter) {
        const double h = 1e-6 * eta;
        double jtj = 0.0;
        double jtr = 0.0;
        for (const auto& p : points) {
            const double r = model(eta, p.pump_power) - p.efficiency;
            const double j = (model(eta + h, p.pump_power) - model(eta - h, p.pump_power)) / (2 * h);
            jtj += j * j;
            jtr += j * r;
        }
        if (jtj == 0.0) break;
        double delta = 0.0;
        double trial_cost = cost;
        for (int k = 0; k < 60; ++k) {
            delta = -jtr / (jtj * (1.0 + damping));
            double trial = eta + delta;
            if (trial <= 0.0) trial = 0.5 * eta, delta = trial - eta;
            trial_cost = sse(trial);
            if (trial_cost <= cost) break;
            damping *= 10.0;
        }
        if (trial_cost <= cost) {
            eta += delta;
            cost = trial_cost;
            damping = std::max(damping / 10.0, 1e-12);
        }
        if (std::abs(delta) <= 1e-9 * eta) {
            const PeakPoint peak = peak_efficiency(eta, length, alpha, beta);
            double max_power = 0.0;
            for (const auto& p : points) max_power = std::max(max_power, p.pump_power);
            if (max_power < 0.5 * peak.pump_power) {
                throw PreconditionError(
                    "efficiency curve stops below half the peak pump power; fit is not "
                    "constrained near the peak");
            }
            return {eta, iter, cost};
        }
    }
    throw FitError("efficiency-curve fit did not converge in 10^4 iterations (residual " +
                       std::to_string(cost) + ")",
                   cost);
}

double loss_normalized_efficiency(double eta_max, double pump_power, double length) {
    if (!(eta_max > 0.0) || !(pump_power > 0.0) || !(length > 0.0)) {
        throw PreconditionError("loss-normalized efficiency needs positive inputs");
    }
    return eta_max / (pump_power * length * length);
}

}  // namespace qfc
