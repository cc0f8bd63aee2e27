#include "qfc/tuner.hpp"

#include "qfc/error.hpp"
#include "qfc/units.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace qfc {

namespace {

size_t cell_count(double length, double cell) {
    const double n = std::round(length / cell);
    if (n < 1 || std::abs(n * cell - length) > 1e-9 * length) {
        std::ostringstream msg;
        msg << "cell size " << cell << " m does not tile length " << length << " m";
        throw DomainError(msg.str());
    }
    return static_cast<size_t>(n);
}

// First and one-past-last cell index covered by heater j.
std::pair<size_t, size_t> heater_cells(const HeaterArray& h, size_t j, double cell) {
    const auto a = static_cast<size_t>(std::llround((h.start + j * h.span) / cell));
    const auto b = static_cast<size_t>(std::llround((h.start + (j + 1) * h.span) / cell));
    return {a, b};
}

bool covers_waveguide(const HeaterArray& h, double length) {
    return std::abs(h.start) < 1e-12 &&
           std::abs(h.start + h.count() * h.span - length) < 1e-9 * length;
}

// Cached per-cell transfers over a wavelength grid. Each heater visit
// computes prefix and suffix products once, after which a trial voltage
// only re-integrates the cells under that heater.
class Workspace {
public:
    Workspace(const WaveguideSpec& spec, const PumpConfig& pump, std::vector<double> base_mismatch,
              std::vector<double> offsets, double step)
        : spec_(spec),
          pump_(pump),
          base_(std::move(base_mismatch)),
          offsets_(std::move(offsets)),
          n_(offsets_.size()),
          substeps_(substeps_for(spec.profile.cell_size, step)),
          g_(coupling_rate(spec.eta_sfg, pump.power)),
          cells_(base_.size() * n_),
          prefix_(base_.size()),
          suffix_(base_.size()) {
        for (size_t l = 0; l < base_.size(); ++l) {
            for (size_t p = 0; p < n_; ++p) cells_[l * n_ + p] = cell(base_[l] + offsets_[physical(p)]);
        }
    }

    size_t size() const { return base_.size(); }

    // Physical cells [a, b) as traversal positions [p0, p1).
    std::pair<size_t, size_t> positions(size_t a, size_t b) const {
        if (pump_.direction == PumpDirection::Forward) return {a, b};
        return {n_ - b, n_ - a};
    }

    size_t physical(size_t pos) const {
        return pump_.direction == PumpDirection::Forward ? pos : n_ - 1 - pos;
    }

    void prepare(size_t a, size_t b) {
        block_ = {a, b};
        const auto [p0, p1] = positions(a, b);
        for (size_t l = 0; l < size(); ++l) {
            Transfer pre = Transfer::identity();
            for (size_t p = 0; p < p0; ++p) pre = at(l, p) * pre;
            Transfer suf = Transfer::identity();
            for (size_t p = p1; p < n_; ++p) suf = at(l, p) * suf;
            prefix_[l] = pre;
            suffix_[l] = suf;
        }
    }

    // Full transfers with the prepared block shifted by `extra`.
    template <typename Fn>
    void with_block(double extra, Fn&& fn) const {
        const auto [p0, p1] = positions(block_.first, block_.second);
        for (size_t l = 0; l < size(); ++l) {
            Transfer h = Transfer::identity();
            for (size_t p = p0; p < p1; ++p) h = cell(base_[l] + offsets_[physical(p)] + extra) * h;
            fn(l, suffix_[l] * h * prefix_[l]);
        }
    }

    // Commit a shift of the prepared block into the cached cells.
    void commit(double extra) {
        for (size_t k = block_.first; k < block_.second; ++k) offsets_[k] += extra;
        const auto [p0, p1] = positions(block_.first, block_.second);
        for (size_t l = 0; l < size(); ++l) {
            for (size_t p = p0; p < p1; ++p) {
                cells_[l * n_ + p] = cell(base_[l] + offsets_[physical(p)]);
            }
        }
    }

    Transfer total(size_t l) const {
        Transfer t = Transfer::identity();
        for (size_t p = 0; p < n_; ++p) t = at(l, p) * t;
        return t;
    }

    double converted(const Transfer& t) const {
        return pump_.process == Process::SFG ? std::norm(t.cb) : std::norm(t.bc);
    }
    double residual(const Transfer& t) const {
        return pump_.process == Process::SFG ? std::norm(t.bb) : std::norm(t.cc);
    }

private:
    const Transfer& at(size_t l, size_t pos) const { return cells_[l * n_ + pos]; }

    Transfer cell(double dk) const {
        return rk4_cell(g_, dk, spec_.loss_1550, spec_.loss_780, spec_.profile.cell_size,
                        substeps_);
    }

    const WaveguideSpec& spec_;
    PumpConfig pump_;
    std::vector<double> base_;
    std::vector<double> offsets_;  // physical order, heaters included
    size_t n_;
    int substeps_;
    double g_;
    std::vector<Transfer> cells_;  // [lambda][traversal position]
    std::vector<Transfer> prefix_, suffix_;
    std::pair<size_t, size_t> block_{0, 0};
};

std::vector<double> base_mismatch(const DispersionModel& d, std::span<const double> grid,
                                  double lambda_pump) {
    std::vector<double> out;
    out.reserve(grid.size());
    for (double l : grid) out.push_back(phase_mismatch(d, l, lambda_pump));
    return out;
}

double fixed_step(const WaveguideSpec& spec, const PumpConfig& pump, double worst_dk) {
    WaveguideSpec probe = spec;
    probe.profile.offsets = {worst_dk};
    return 0.5 * max_step(probe, pump, 0.0);
}

struct GridPeak {
    double value = 0.0;
    double position = 0.0;  // fractional grid index
};

// Largest sample refined by a 3-point parabola, so that a pure translation
// of the spectrum does not change the objective by where the peak falls
// between grid points.
GridPeak refine_peak(const std::vector<double>& y) {
    const size_t i = static_cast<size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    if (i == 0 || i + 1 == y.size()) return {y[i], static_cast<double>(i)};
    const double a = y[i - 1], b = y[i], c = y[i + 1];
    const double curv = a - 2 * b + c;
    if (!(curv < 0.0)) return {b, static_cast<double>(i)};
    const double delta = 0.5 * (a - c) / curv;
    return {b - 0.25 * (a - c) * delta, static_cast<double>(i) + delta};
}

GridPeak peak_of(const Workspace& ws) {
    std::vector<double> y(ws.size());
    for (size_t l = 0; l < ws.size(); ++l) y[l] = ws.converted(ws.total(l));
    return refine_peak(y);
}

struct SearchResult {
    double voltage;
    double value;
};

// Maximise f on [0, v_max]: coarse scan, then golden section inside the
// best coarse bracket.
SearchResult line_search(const std::function<double(double)>& f, double v_max, int coarse,
                         double tol) {
    std::vector<double> vs(coarse), fs(coarse);
    for (int i = 0; i < coarse; ++i) {
        vs[i] = v_max * i / (coarse - 1);
        fs[i] = f(vs[i]);
    }
    const int i = static_cast<int>(std::max_element(fs.begin(), fs.end()) - fs.begin());
    double a = vs[std::max(i - 1, 0)];
    double b = vs[std::min(i + 1, coarse - 1)];
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if (fm > fs[i]) return {mid, fm};
    return {vs[i], fs[i]};
}

std::vector<double> offsets_with_heaters(const WaveguideSpec& spec, const HeaterArray& h) {
    return apply_heaters(spec.profile, h).offsets;
}

}  // namespace

void validate(const HeaterArray& h, double length, double cell_size) {
    for (size_t j = 0; j < h.count(); ++j) {
        const double v = h.voltages[j];
        if (!(v >= 0.0 && v <= h.v_max * (1 + 1e-12))) {
            std::ostringstream msg;
            msg << "heater " << j << " voltage " << v << " V outside [0, " << h.v_max << "] V";
            throw ActuationError(msg.str());
        }
    }
    if (!(h.span > 0.0) || h.start < 0.0 ||
        h.start + h.count() * h.span > length * (1 + 1e-9)) {
        throw DomainError("heater spans leave the waveguide");
    }
    const double per = h.span / cell_size;
    const double off = h.start / cell_size;
    if (std::abs(per - std::round(per)) > 1e-6 || std::abs(off - std::round(off)) > 1e-6) {
        throw DomainError("disorder cell size must divide the heater span and offset");
    }
}

MismatchProfile generate_disorder(const DisorderSpec& spec, double length) {
    if (!(spec.sigma_step >= 0.0)) throw DomainError("sigma_step must be >= 0");
    if (!(spec.correlation_length >= 0.0)) throw DomainError("correlation length must be >= 0");
    const size_t n = cell_count(length, spec.cell_size);
    MismatchProfile out{spec.cell_size, std::vector<double>(n, 0.0)};
    if (spec.sigma_step == 0.0) return out;

    const double rho =
        spec.correlation_length > 0.0 ? std::exp(-spec.cell_size / spec.correlation_length) : 0.0;
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double x = spec.sigma_step / std::sqrt(1.0 - rho * rho) * normal(rng);
    double mean = 0.0;
    for (size_t k = 0; k < n; ++k) {
        if (k > 0) x = rho * x + spec.sigma_step * normal(rng);
        out.offsets[k] = x;
        mean += x;
    }
    mean /= static_cast<double>(n);
    for (auto& v : out.offsets) v -= mean;
    return out;
}

double expected_disorder_variance(const DisorderSpec& spec, double length) {
    const size_t n = cell_count(length, spec.cell_size);
    const double rho =
        spec.correlation_length > 0.0 ? std::exp(-spec.cell_size / spec.correlation_length) : 0.0;
    const double gamma0 = spec.sigma_step * spec.sigma_step / (1.0 - rho * rho);
    // Var(mean) = gamma0/N^2 [N + 2 sum_{k>=1} (N-k) rho^k]
    double s = static_cast<double>(n);
    double rk = 1.0;
    for (size_t k = 1; k < n; ++k) {
        rk *= rho;
        s += 2.0 * static_cast<double>(n - k) * rk;
    }
    const double nn = static_cast<double>(n);
    return gamma0 * (1.0 - s / (nn * nn));
}

MismatchProfile apply_heaters(const MismatchProfile& profile, const HeaterArray& heaters) {
    validate(heaters, profile.length(), profile.cell_size);
    MismatchProfile out = profile;
    for (size_t j = 0; j < heaters.count(); ++j) {
        const auto [a, b] = heater_cells(heaters, j, profile.cell_size);
        const double shift = heaters.shift(j);
        for (size_t k = a; k < b && k < out.offsets.size(); ++k) out.offsets[k] += shift;
    }
    return out;
}

std::vector<double> tuner_spectrum(const WaveguideSpec& spec, const PumpConfig& pump,
                                   const DispersionModel& dispersion, const HeaterArray& heaters,
                                   std::span<const double> grid, double step) {
    validate(spec);
    Workspace ws(spec, pump, base_mismatch(dispersion, grid, pump.wavelength),
                 offsets_with_heaters(spec, heaters), step);
    std::vector<double> out(ws.size());
    for (size_t l = 0; l < ws.size(); ++l) out[l] = ws.converted(ws.total(l));
    return out;
}

TuneResult sequential_tune(const WaveguideSpec& spec, const PumpConfig& pump,
                           const DispersionModel& dispersion, const HeaterArray& heaters,
                           const TuneOptions& options) {
    validate(spec);
    validate(heaters, spec.length, spec.profile.cell_size);
    if (options.passes < 1 || options.coarse_points < 3 || !(options.voltage_tolerance > 0.0)) {
        throw PreconditionError("tuning needs passes >= 1, >= 3 coarse points, tolerance > 0");
    }

    // Objective grid.
    double center = options.center_wavelength;
    if (center <= 0.0) {
        const auto& te = dispersion.mode(ModeLabel::TE1550);
        center = solve_phase_matching(dispersion, pump.wavelength, {te.lambda_min, te.lambda_max});
    }
    const double D = dispersion.dispersion_factor != 0.0
                         ? dispersion.dispersion_factor
                         : compute_dispersion_factor(dispersion, pump.wavelength, center);
    double lo_off = 0.0, hi_off = 0.0;
    for (double v : spec.profile.offsets) lo_off = std::min(lo_off, v), hi_off = std::max(hi_off, v);
    const double reach = heaters.response * heaters.v_max * heaters.v_max;
    const double margin = 3.0 * 2.0 * units::pi / spec.length;
    const double dk_lo = -(hi_off + reach) - margin;
    const double dk_hi = -lo_off + margin;
    const double l1 = center + D * dk_lo, l2 = center + D * dk_hi;
    const double lam_lo = std::min(l1, l2), lam_hi = std::max(l1, l2);
    const double pitch = options.pitch > 0.0 ? options.pitch : ideal_bandwidth(D, spec.length) / 20;

    TuneResult result;
    const auto n_grid = static_cast<size_t>(std::ceil((lam_hi - lam_lo) / pitch)) + 1;
    for (size_t i = 0; i < n_grid; ++i) result.grid.push_back(lam_lo + pitch * i);
    const auto base = base_mismatch(dispersion, result.grid, pump.wavelength);
    double worst = 0.0;
    for (double b : base) {
        worst = std::max({worst, std::abs(b + lo_off), std::abs(b + hi_off + reach)});
    }
    result.step = fixed_step(spec, pump, worst);

    result.initial_objective =
        peak_of(Workspace(spec, pump, base, offsets_with_heaters(spec, heaters), result.step)).value;

    HeaterArray h = heaters;
    std::fill(h.voltages.begin(), h.voltages.end(), h.v_max / std::sqrt(2.0));
    Workspace ws(spec, pump, base, offsets_with_heaters(spec, h), result.step);
    double current = peak_of(ws).value;

    const size_t nh = h.count();
    const bool from_input = pump.process == Process::SFG;
    auto visit_order = [&](size_t i) {
        // Position i along the traversal, counted from the chosen end.
        const bool forward_first = (pump.direction == PumpDirection::Forward) == from_input;
        return forward_first ? i : nh - 1 - i;
    };

    auto tune_heater = [&](Workspace& w, size_t j, double& cur, int stage, bool minimise) {
        const auto [a, b] = heater_cells(h, j, spec.profile.cell_size);
        w.prepare(a, b);
        const double old_shift = h.shift(j);
        auto objective = [&](double v) {
            const double extra = h.response * v * v - old_shift;
            std::vector<double> y(w.size());
            w.with_block(extra, [&](size_t l, const Transfer& t) {
                y[l] = minimise ? -w.residual(t) : w.converted(t);
            });
            return minimise ? y[0] : refine_peak(y).value;
        };
        const SearchResult r =
            line_search(objective, h.v_max, options.coarse_points, options.voltage_tolerance);
        const double signed_cur = minimise ? -cur : cur;
        if (r.value > signed_cur + 1e-12 * std::abs(signed_cur)) {
            w.commit(h.response * r.voltage * r.voltage - old_shift);
            h.voltages[j] = r.voltage;
            cur = minimise ? -r.value : r.value;
            result.history.push_back({stage, j, r.voltage, cur});
        }
    };

    for (int pass = 0; pass < options.passes; ++pass) {
        for (size_t i = 0; i < nh; ++i) tune_heater(ws, visit_order(i), current, pass, false);
    }

    if (options.residual_stage && nh > 0) {
        const double at = peak_of(ws).position;
        std::vector<double> one{result.grid.front() + pitch * at};
        Workspace rs(spec, pump, base_mismatch(dispersion, one, pump.wavelength),
                     offsets_with_heaters(spec, h), result.step);
        double resid = rs.residual(rs.total(0));
        for (size_t i = 0; i < nh; ++i) {
            tune_heater(rs, visit_order(i), resid, options.passes, true);
        }
    }

    if (covers_waveguide(h, spec.length) && nh > 0) {
        double min_shift = h.shift(0);
        for (size_t j = 1; j < nh; ++j) min_shift = std::min(min_shift, h.shift(j));
        for (size_t j = 0; j < nh; ++j) {
            h.voltages[j] = std::sqrt(std::max(0.0, h.shift(j) - min_shift) / h.response);
        }
    }
    result.heaters = h;
    result.final_objective =
        peak_of(Workspace(spec, pump, base, offsets_with_heaters(spec, h), result.step)).value;
    return result;
}

ConversionSpectrum calibration_spectrum(const WaveguideSpec& spec,
                                        const DispersionModel& dispersion, double pump_wavelength,
                                        double center_wavelength, const ProbeOptions& options) {
    validate(spec);
    const double D = dispersion.dispersion_factor;
    if (D == 0.0) throw PreconditionError("dispersion factor is not set");
    const auto& off = spec.profile.offsets;
    const auto [mn, mx] = std::minmax_element(off.begin(), off.end());
    double mean = 0.0;
    for (double v : off) mean += v;
    mean /= static_cast<double>(off.size());
    const double half =
        options.half_span > 0.0 ? options.half_span : 200.0 / spec.length + 0.5 * (*mx - *mn);
    const double pitch =
        options.pitch > 0.0 ? options.pitch : ideal_bandwidth(D, spec.length) / 20.0;
    const double mid = center_wavelength + D * (-mean);
    const double width = std::abs(D) * half;
    const auto n = static_cast<size_t>(std::ceil(width / pitch));
    std::vector<double> grid;
    grid.reserve(2 * n + 1);
    for (size_t i = 0; i <= 2 * n; ++i) {
        grid.push_back(mid + (static_cast<double>(i) - static_cast<double>(n)) * pitch);
    }
    PumpConfig probe{options.probe_power, pump_wavelength, PumpDirection::Forward, Process::SFG};
    return spectrum(spec, probe, dispersion, grid);
}

CalibrationReport measure_calibration(const WaveguideSpec& spec,
                                      const DispersionModel& dispersion, double pump_wavelength,
                                      double center_wavelength, const ProbeOptions& options) {
    const auto sp =
        calibration_spectrum(spec, dispersion, pump_wavelength, center_wavelength, options);
    const double D =
        compute_dispersion_factor(dispersion, pump_wavelength, sp.peak().wavelength);
    return self_calibrated_R(sp, D, spec.length);
}

double ideal_bandwidth(double dispersion_factor, double length) {
    return 5.57 / length * std::abs(dispersion_factor);
}

double bandwidth_to_hz(double width, double wavelength) {
    return units::speed_of_light * width / (wavelength * wavelength);
}

double corrected_eta(double eta_measured, double R) {
    if (!(R > 0.0)) throw PreconditionError("R must be positive");
    return eta_measured / R;
}

CalibrationReport self_calibrated_R(const ConversionSpectrum& spectrum, double dispersion_factor,
                                    double length) {
    const auto& s = spectrum.samples;
    if (s.size() < 3) throw CoverageError("spectrum has fewer than 3 samples");
    const auto& pk = spectrum.peak();
    if (!(pk.efficiency > 0.0)) throw CoverageError("spectrum has no converted signal");
    if (s.front().efficiency >= 0.01 * pk.efficiency || s.back().efficiency >= 0.01 * pk.efficiency) {
        std::ostringstream msg;
        msg << "spectrum edges (" << s.front().efficiency / pk.efficiency << ", "
            << s.back().efficiency / pk.efficiency
            << " of peak) do not fall below 1% of the peak; widen the grid";
        throw CoverageError(msg.str());
    }
    CalibrationReport r;
    r.peak_efficiency = pk.efficiency;
    r.peak_wavelength = pk.wavelength;
    for (size_t i = 1; i < s.size(); ++i) {
        r.area += 0.5 * (s[i].efficiency + s[i - 1].efficiency) *
                  (s[i].wavelength - s[i - 1].wavelength);
    }
    r.R = pk.efficiency * 2.0 * units::pi * std::abs(dispersion_factor) / (r.area * length);

    const double half = 0.5 * pk.efficiency;
    auto cross = [&](size_t i) {
        const double a = s[i - 1].efficiency - half, b = s[i].efficiency - half;
        return s[i - 1].wavelength + (s[i].wavelength - s[i - 1].wavelength) * a / (a - b);
    };
    double left = s.front().wavelength, right = s.back().wavelength;
    for (size_t i = 1; i < s.size(); ++i) {
        if (s[i].efficiency >= half) {
            left = cross(i);
            break;
        }
    }
    for (size_t i = s.size() - 1; i > 0; --i) {
        if (s[i - 1].efficiency >= half) {
            right = cross(i);
            break;
        }
    }
    r.bandwidth = right - left;
    r.ideal_bandwidth = ideal_bandwidth(dispersion_factor, length);
    return r;
}

MismatchProfile thermal_drift(const MismatchProfile& profile, double pump_power,
                              const DriftSpec& drift, PumpDirection direction) {
    MismatchProfile out = profile;
    if (pump_power == 0.0) return out;
    const double length = profile.length();
    const double decay = std::isnan(drift.decay_length) ? length : drift.decay_length;
    for (size_t k = 0; k < out.offsets.size(); ++k) {
        const double z = (static_cast<double>(k) + 0.5) * profile.cell_size;
        const double s = direction == PumpDirection::Forward ? z : length - z;
        const double shape = std::isinf(decay) ? 1.0 : std::exp(-s / decay);
        out.offsets[k] += pump_power * (drift.uniform + drift.gradient * shape);
    }
    return out;
}

double extract_loss_from_segment_shg(std::span<const double> peaks, double segment_length) {
    if (peaks.size() < 2) throw DataError("loss extraction needs at least 2 segment peaks");
    if (!(segment_length > 0.0)) throw DataError("segment length must be positive");
    for (size_t i = 0; i < peaks.size(); ++i) {
        if (!(peaks[i] > 0.0)) {
            throw DataError("segment peak " + std::to_string(i) + " is not positive");
        }
    }
    double sum = 0.0;
    for (size_t i = 0; i + 1 < peaks.size(); ++i) sum += peaks[i] / peaks[i + 1];
    const double mean = sum / static_cast<double>(peaks.size() - 1);
    return 10.0 * std::log10(mean) / (segment_length / units::cm);
}

double loss_from_quality_factor(double group_index, double wavelength, double quality_factor) {
    const double omega = 2.0 * units::pi * units::speed_of_light / wavelength;
    return group_index * omega / (units::speed_of_light * quality_factor);
}

}  // namespace qfc
