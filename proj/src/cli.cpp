#include "qfc/cli.hpp"

#include "qfc/csv.hpp"
#include "qfc/error.hpp"
#include "qfc/noise.hpp"
#include "qfc/presets.hpp"
#include "qfc/quantum.hpp"
#include "qfc/scenario.hpp"
#include "qfc/tuner.hpp"
#include "qfc/units.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace qfc::cli {

namespace {

namespace fs = std::filesystem;
using units::Quantity;
using Json = nlohmann::ordered_json;

struct Output {
    std::vector<std::pair<std::string, csv::Table>> tables;
    std::vector<std::pair<std::string, std::string>> files;  // preformatted text
    std::ostringstream report;
    Json metrics = Json::object();
    std::optional<std::vector<double>> heaters;
};

std::string fmt(double v, int precision = 6) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
    return out;
}

csv::Column col(std::string name, Quantity q = Quantity::Dimensionless) {
    return {std::move(name), q};
}

WaveguideSpec heated_waveguide(const Scenario& s) {
    WaveguideSpec wg = disordered_waveguide(s);
    wg.profile = apply_heaters(wg.profile, s.heaters);
    return wg;
}

CalibrationReport calibrate(const Scenario& s, const WaveguideSpec& wg) {
    return measure_calibration(wg, s.dispersion, s.pump.wavelength, s.signal_wavelength);
}

void report_calibration(Output& o, const std::string& label, const CalibrationReport& c) {
    o.report << label << ": R = " << fmt(c.R, 5) << ", B/B0 = " << fmt(c.bandwidth / c.ideal_bandwidth, 5)
             << " (B = " << fmt(c.bandwidth / units::nm, 5) << " nm, "
             << fmt(bandwidth_to_hz(c.bandwidth, c.peak_wavelength) / 1e9, 4) << " GHz)\n";
}

csv::Table spectrum_table(const ConversionSpectrum& sp) {
    csv::Table t{{col("wavelength", Quantity::Length), col("efficiency")}, {}};
    for (const auto& p : sp.samples) t.rows.push_back({p.wavelength, p.efficiency});
    return t;
}

// ---------------------------------------------------------------- commands

void cmd_spectrum(const Scenario& s, Output& o) {
    const WaveguideSpec wg = heated_waveguide(s);
    const auto grid = linspace(s.spectrum.center - s.spectrum.half_span,
                               s.spectrum.center + s.spectrum.half_span, s.spectrum.points);
    const auto sp = spectrum(wg, s.pump, s.dispersion, grid);
    o.tables.emplace_back("spectrum.csv", spectrum_table(sp));
    const auto& pk = sp.peak();
    o.report << to_string(s.pump.process) << " " << to_string(s.pump.direction) << " spectrum at "
             << fmt(s.pump.power / units::mW) << " mW: peak " << fmt(pk.efficiency) << " at "
             << fmt(pk.wavelength / units::nm, 8) << " nm\n";
    const auto cal = calibrate(s, wg);
    report_calibration(o, "weak-probe calibration", cal);
    o.metrics["peak_efficiency"] = pk.efficiency;
    o.metrics["peak_wavelength_m"] = pk.wavelength;
    o.metrics["R"] = cal.R;
    o.metrics["B_over_B0"] = cal.bandwidth / cal.ideal_bandwidth;
}

struct TuneOutcome {
    WaveguideSpec before, after;
    TuneResult result;
    CalibrationReport cal_before, cal_after;
};

TuneOutcome tune_waveguide(const Scenario& s, const WaveguideSpec& base) {
    TuneOutcome t;
    t.before = base;
    t.before.profile = apply_heaters(base.profile, s.heaters);
    const PumpConfig pump{s.tuning.pump_power, s.pump.wavelength, s.pump.direction, s.pump.process};
    t.result = sequential_tune(base, pump, s.dispersion, s.heaters, s.tuning.options);
    t.after = base;
    t.after.profile = apply_heaters(base.profile, t.result.heaters);
    t.cal_before = calibrate(s, t.before);
    t.cal_after = calibrate(s, t.after);
    return t;
}

csv::Table heater_table(const HeaterArray& h) {
    csv::Table t{{col("heater"), col("start", Quantity::Length), col("voltage", Quantity::Voltage)},
                 {}};
    for (size_t j = 0; j < h.count(); ++j) {
        t.rows.push_back({double(j), h.start + double(j) * h.span, h.voltages[j]});
    }
    return t;
}

void record_tune(const TuneOutcome& t, Output& o) {
    o.heaters = t.result.heaters.voltages;
    o.tables.emplace_back("heaters.csv", heater_table(t.result.heaters));
    report_calibration(o, "before tuning", t.cal_before);
    report_calibration(o, "after tuning", t.cal_after);
    o.report << "objective " << fmt(t.result.initial_objective) << " -> "
             << fmt(t.result.final_objective) << " over " << t.result.history.size()
             << " accepted updates\nvoltages [V]:";
    for (double v : t.result.heaters.voltages) o.report << " " << fmt(v, 4);
    o.report << "\n";
    o.metrics["R_before"] = t.cal_before.R;
    o.metrics["R_after"] = t.cal_after.R;
    o.metrics["B_over_B0_after"] = t.cal_after.bandwidth / t.cal_after.ideal_bandwidth;
}

void cmd_tune(const Scenario& s, Output& o) {
    const auto t = tune_waveguide(s, disordered_waveguide(s));
    const ProbeOptions probe;
    o.tables.emplace_back(
        "spectrum_before.csv",
        spectrum_table(calibration_spectrum(t.before, s.dispersion, s.pump.wavelength,
                                            s.signal_wavelength, probe)));
    o.tables.emplace_back(
        "spectrum_after.csv",
        spectrum_table(calibration_spectrum(t.after, s.dispersion, s.pump.wavelength,
                                            s.signal_wavelength, probe)));
    record_tune(t, o);
}

void efficiency_curve(const Scenario& s, Output& o, const std::string& name) {
    const WaveguideSpec wg = heated_waveguide(s);
    const double base = phase_mismatch(s.dispersion, s.signal_wavelength, s.pump.wavelength);
    csv::Table t{{col("pump", Quantity::Power), col("efficiency"), col("analytic")}, {}};
    CurvePoint best;
    for (double p : s.pump_sweep.values()) {
        PumpConfig pump = s.pump;
        pump.power = p;
        const double eta = conversion_efficiency(wg, pump, base, 0.5 * max_step(wg, pump, base));
        t.rows.push_back({p, eta,
                          analytic_efficiency(wg.eta_sfg, p, wg.length, wg.loss_1550, wg.loss_780)});
        if (eta > best.efficiency) best = {p, eta};
    }
    o.tables.emplace_back(name, std::move(t));
    const auto peak = peak_efficiency(wg.eta_sfg, wg.length, wg.loss_1550, wg.loss_780);
    o.report << "analytic peak: eta = " << fmt(peak.efficiency, 4) << " at "
             << fmt(peak.pump_power / units::mW, 4) << " mW\n"
             << "sweep maximum: eta = " << fmt(best.efficiency, 4) << " at "
             << fmt(best.pump_power / units::mW, 4) << " mW\n"
             << "loss-normalised efficiency: "
             << fmt(loss_normalized_efficiency(peak.efficiency, peak.pump_power, wg.length) / 1e4, 4)
             << " /W/cm^2\n";
    o.metrics["eta_max"] = peak.efficiency;
    o.metrics["P_peak_W"] = peak.pump_power;
    o.metrics["sweep_max_eta"] = best.efficiency;
    o.metrics["sweep_max_P_W"] = best.pump_power;
}

void cmd_fit(const Scenario& s, Output& o, const fs::path& input) {
    const auto table =
        csv::read_file(input, {col("pump", Quantity::Power), col("eta", Quantity::Dimensionless)});
    std::vector<CurvePoint> pts;
    for (const auto& r : table.rows) pts.push_back({r[0], r[1]});
    const auto& wg = s.waveguide;
    const auto fit = fit_efficiency_curve(pts, wg.length, wg.loss_1550, wg.loss_780);
    csv::Table curve{{col("pump", Quantity::Power), col("eta"), col("fit")}, {}};
    for (const auto& p : pts) {
        curve.rows.push_back({p.pump_power, p.efficiency,
                              analytic_efficiency(fit.eta_sfg, p.pump_power, wg.length,
                                                  wg.loss_1550, wg.loss_780)});
    }
    o.tables.emplace_back("fit_curve.csv", std::move(curve));
    o.tables.emplace_back(
        "fit.csv",
        csv::Table{{col("eta_sfg", Quantity::NormalizedEfficiency), col("residual"),
                    col("iterations")},
                   {{fit.eta_sfg, fit.residual, double(fit.iterations)}}});
    o.report << "fitted eta_SFG = " << fmt(fit.eta_sfg / 1e4, 6) << " /W/cm^2 ("
             << fmt(fit.eta_sfg / 1e2, 6) << " %/W/cm^2), residual " << fmt(fit.residual, 3)
             << ", " << fit.iterations << " iterations\n";
    o.metrics["eta_sfg_per_W_m2"] = fit.eta_sfg;
    o.metrics["residual"] = fit.residual;
}

void noise_table(const Scenario& s, Output& o, const std::string& name) {
    csv::Table t{{col("detuning", Quantity::Length), col("pump", Quantity::Power), col("linear"),
                  col("quadratic"), col("total")},
                 {}};
    const auto powers = s.noise.powers.values();
    Json exps = Json::object();
    for (double det : s.noise.detunings) {
        const auto b = noise_budget(s.noise.model, det, powers);
        std::vector<PowerFlux> pts;
        for (const auto& p : b.points) {
            t.rows.push_back({det, p.pump_power, p.linear, p.quadratic, p.total()});
            pts.push_back({p.pump_power, p.total()});
        }
        o.report << "detuning " << fmt(det / units::nm) << " nm: ";
        if (pts.size() >= 3) {
            const double k = fit_power_scaling(pts);
            o.report << "power-law exponent " << fmt(k, 4) << "\n";
            exps[fmt(det / units::nm) + "nm"] = k;
        } else {
            o.report << "fewer than 3 powers, no exponent\n";
        }
    }
    o.tables.emplace_back(name, std::move(t));

    const double lambda_s = s.pump.wavelength + s.noise.raman_detuning;
    const double f_rs =
        raman_flux(s.noise.raman, s.waveguide.length, s.pump.power, s.pump.wavelength, lambda_s);
    const double f_u = upconverted_noise(s.noise.upconvert_flux, s.waveguide, s.pump);
    const double p_star =
        s.noise.model.linear_coefficient /
        (std::pow(s.noise.model.eta_nl * s.noise.model.length, 2) *
         sfwm_envelope(s.noise.detunings.empty() ? 0.0 : s.noise.detunings.back(),
                       s.noise.model.sfwm_bandwidth));
    o.report << "Raman estimate at " << fmt(s.pump.power / units::mW) << " mW, "
             << fmt(s.noise.raman_detuning / units::nm) << " nm detuning: " << fmt(f_rs, 4)
             << " cps/Hz\n"
             << "upconverted noise for " << fmt(s.noise.upconvert_flux, 4)
             << " cps/Hz input: " << fmt(f_u, 4) << " cps/Hz\n"
             << "linear/quadratic crossover at the last detuning: " << fmt(p_star / units::mW, 4)
             << " mW\n";
    o.metrics["exponents"] = exps;
    o.metrics["raman_flux"] = f_rs;
    o.metrics["upconverted_flux"] = f_u;
}

void cmd_visibility(const Scenario& s, Output& o) {
    csv::Table t{{col("v_idler"), col("v_signal"), col("bound"), col("enumerated")}, {}};
    Json arr = Json::array();
    for (double vs : s.quantum.v_signal) {
        const double b = min_two_photon_visibility(s.quantum.v_idler, vs);
        const double e = enumerated_min_two_photon_visibility(s.quantum.v_idler, vs);
        t.rows.push_back({s.quantum.v_idler, vs, b, e});
        o.report << "V_i = " << fmt(s.quantum.v_idler) << ", V_s = " << fmt(vs)
                 << ": bound " << fmt(b, 5) << ", four-branch minimum " << fmt(e, 5) << "\n";
        arr.push_back({{"v_signal", vs}, {"bound", b}, {"enumerated", e}});
    }
    o.tables.emplace_back("visibility.csv", std::move(t));
    o.metrics["visibility"] = arr;
}

void report_rho(Output& o, const std::string& label, const DensityMatrix& r) {
    const auto ev = r.eigenvalues();
    o.report << label << ": [[" << fmt(r(0, 0).real(), 5) << ", " << fmt(r(0, 1).real(), 5)
             << (r(0, 1).imag() < 0 ? " - " : " + ") << fmt(std::abs(r(0, 1).imag()), 5)
             << "i], [" << fmt(r(1, 0).real(), 5) << (r(1, 0).imag() < 0 ? " - " : " + ")
             << fmt(std::abs(r(1, 0).imag()), 5) << "i, " << fmt(r(1, 1).real(), 5)
             << "]], eigenvalues " << fmt(ev[0], 5) << ", " << fmt(ev[1], 5) << "\n";
}

csv::Table rho_table(const DensityMatrix& r) {
    csv::Table t{{col("row"), col("col"), col("real"), col("imag")}, {}};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) t.rows.push_back({double(i), double(j), r(i, j).real(), r(i, j).imag()});
    }
    return t;
}

struct NamedState {
    const char* name;
    BasisState state;
};

constexpr NamedState kStates[] = {{"early", BasisState::Early}, {"late", BasisState::Late},
                                  {"plus", BasisState::Plus},   {"minus", BasisState::Minus},
                                  {"left", BasisState::Left},   {"right", BasisState::Right}};

std::optional<BasisState> parse_state(const std::string& name) {
    static const std::map<std::string, BasisState> names{
        {"e", BasisState::Early}, {"early", BasisState::Early}, {"l", BasisState::Late},
        {"late", BasisState::Late}, {"+", BasisState::Plus},    {"plus", BasisState::Plus},
        {"-", BasisState::Minus},   {"minus", BasisState::Minus}, {"L", BasisState::Left},
        {"left", BasisState::Left}, {"R", BasisState::Right},   {"right", BasisState::Right}};
    auto it = names.find(name);
    if (it == names.end()) return std::nullopt;
    return it->second;
}

void tomography_from_counts(Output& o, const fs::path& input, std::optional<BasisState> state) {
    const auto rec = projector_counts(csv::read_counts_file(input));
    const auto st = stokes(rec);
    const auto lin = linear_reconstruct(st);
    const auto mle = mle_reconstruct(rec);
    o.report << "Stokes: S0 = " << fmt(st.s0) << ", S1 = " << fmt(st.s1) << ", S2 = " << fmt(st.s2)
             << ", S3 = " << fmt(st.s3) << "\n";
    report_rho(o, "linear", lin);
    report_rho(o, "MLE", mle.rho);
    o.report << "MLE converged in " << mle.iterations << " iterations (gradient "
             << fmt(mle.gradient_norm, 3) << ")\n";
    o.tables.emplace_back("rho.csv", rho_table(mle.rho));
    if (state) {
        const double f = fidelity(basis_state(*state), mle.rho);
        o.report << "fidelity: " << fmt(f, 6) << "\n";
        o.metrics["fidelity"] = f;
    }
    o.metrics["linear_physical"] = is_physical(lin);
}

void tomography_simulated(const Scenario& s, Output& o, const std::string& name,
                          bool write_counts) {
    csv::Table t{{col("state"), col("fidelity"), col("rho_ee"), col("rho_ll"), col("rho_el_real"),
                  col("rho_el_imag")},
                 {}};
    double mean = 0.0;
    Json fids = Json::object();
    for (size_t k = 0; k < std::size(kStates); ++k) {
        const auto psi = basis_state(kStates[k].state);
        const auto rho = DensityMatrix::pure(psi);
        RawBins bins;
        if (s.quantum.sampling == Sampling::Poisson) {
            std::mt19937_64 rng(
                substream_seed(s.require_seed(), std::string("poisson/") + kStates[k].name));
            bins = sample_bins(rho, s.quantum.pairs_per_setting, rng, s.quantum.analyzer);
        } else {
            bins = expected_bins(rho, s.quantum.pairs_per_setting, s.quantum.analyzer);
        }
        if (write_counts) {
            std::ostringstream text;
            csv::write_counts(text, bins);
            o.files.emplace_back(std::string("counts_") + kStates[k].name + ".csv", text.str());
        }
        const auto est = mle_reconstruct(projector_counts(bins)).rho;
        const double f = fidelity(psi, est);
        mean += f / double(std::size(kStates));
        t.rows.push_back({double(k), f, est(0, 0).real(), est(1, 1).real(), est(0, 1).real(),
                          est(0, 1).imag()});
        o.report << kStates[k].name << ": F = " << fmt(f, 5) << "\n";
        fids[kStates[k].name] = f;
    }
    o.report << "mean fidelity " << fmt(mean, 5) << "\n";
    o.tables.emplace_back(name, std::move(t));
    o.metrics["fidelities"] = fids;
    o.metrics["mean_fidelity"] = mean;
}

// ---------------------------------------------------------------- presets

void preset_fig2a(const Scenario& s, Output& o) {
    const auto t = tune_waveguide(s, disordered_waveguide(s));
    const auto before = calibration_spectrum(t.before, s.dispersion, s.pump.wavelength,
                                             s.signal_wavelength);
    std::vector<double> grid;
    for (const auto& p : before.samples) grid.push_back(p.wavelength);
    const PumpConfig probe{ProbeOptions{}.probe_power, s.pump.wavelength, PumpDirection::Forward,
                           Process::SFG};
    const auto after = spectrum(t.after, probe, s.dispersion, grid);
    csv::Table table{{col("wavelength", Quantity::Length), col("before"), col("after")}, {}};
    for (size_t i = 0; i < grid.size(); ++i) {
        table.rows.push_back({grid[i], before.samples[i].efficiency, after.samples[i].efficiency});
    }
    o.tables.emplace_back("fig2a.csv", std::move(table));
    record_tune(t, o);
}

Scenario with_length(const Scenario& s, double length) {
    Scenario out = s;
    const double cell = s.waveguide.profile.cell_size;
    out.waveguide.length = length;
    out.waveguide.profile =
        MismatchProfile::uniform(length, static_cast<size_t>(std::llround(length / cell)));
    const auto count = static_cast<size_t>(std::floor(length / s.heaters.span + 1e-9));
    out.heaters.voltages.assign(count, 0.0);
    return out;
}

void preset_s5(const Scenario& s, Output& o) {
    csv::Table lengths{{col("length", Quantity::Length), col("tuned"), col("R"),
                        col("bandwidth_ratio")},
                       {}};
    for (double mm : {6.0, 2.5, 0.85, 0.34}) {
        const Scenario sl = with_length(s, mm * units::mm);
        const bool tuned = mm >= 2.0;
        CalibrationReport cal;
        if (tuned) {
            cal = tune_waveguide(sl, disordered_waveguide(sl)).cal_after;
        } else {
            cal = calibrate(sl, disordered_waveguide(sl));
        }
        lengths.rows.push_back({mm * units::mm, tuned ? 1.0 : 0.0, cal.R,
                                cal.bandwidth / cal.ideal_bandwidth});
        o.report << fmt(mm) << " mm " << (tuned ? "tuned" : "untuned") << ": R = " << fmt(cal.R, 4)
                 << ", B/B0 = " << fmt(cal.bandwidth / cal.ideal_bandwidth, 4) << "\n";
    }
    o.tables.emplace_back("s5_length.csv", std::move(lengths));

    // Tuned once at the tuning power, then exposed to pump heating.
    const WaveguideSpec base = disordered_waveguide(s);
    const auto low = tune_waveguide(s, base);
    o.heaters = low.result.heaters.voltages;
    csv::Table power{{col("pump", Quantity::Power), col("R_stale"), col("R_retuned")}, {}};
    for (double mw : {1.0, 10.0, 25.0, 50.0}) {
        const double p = mw * units::mW;
        WaveguideSpec hot = base;
        hot.profile = thermal_drift(base.profile, p, s.drift, s.pump.direction);
        WaveguideSpec stale = hot;
        stale.profile = apply_heaters(hot.profile, low.result.heaters);
        const double r_stale = calibrate(s, stale).R;
        const double r_fresh = tune_waveguide(s, hot).cal_after.R;
        power.rows.push_back({p, r_stale, r_fresh});
        o.report << fmt(mw) << " mW pump heating: R stale " << fmt(r_stale, 4) << ", re-tuned "
                 << fmt(r_fresh, 4) << "\n";
    }
    o.tables.emplace_back("s5_power.csv", std::move(power));
}

const std::map<std::string, std::string_view>& presets() {
    static const std::map<std::string, std::string_view> table{
        {"fig2a", presets::fig2a}, {"fig2b", presets::fig2b}, {"fig2e", presets::fig2e},
        {"fig2f", presets::fig2f}, {"fig4d", presets::fig4d}, {"s5", presets::s5}};
    return table;
}

void run_preset(const std::string& name, const Scenario& s, Output& o) {
    if (name == "fig2a") return preset_fig2a(s, o);
    if (name == "fig2b" || name == "fig2e") return efficiency_curve(s, o, name + ".csv");
    if (name == "fig2f") return noise_table(s, o, "fig2f.csv");
    if (name == "fig4d") return tomography_simulated(s, o, "fig4d.csv", false);
    if (name == "s5") return preset_s5(s, o);
    throw ConfigError("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------- plumbing

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void persist(const fs::path& dir, const std::string& command, const Scenario& s, Output& o,
             std::ostream& out, bool print_report) {
    fs::create_directories(dir);
    Json record;
    record["command"] = command;
    record["scenario_hash"] = s.hash();
    record["seed"] = s.seed ? Json(*s.seed) : Json(nullptr);
    record["timestamp"] = utc_timestamp();
    Json artifacts = Json::array();
    for (const auto& [name, table] : o.tables) {
        csv::write_file(dir / name, table);
        artifacts.push_back(name);
    }
    for (const auto& [name, text] : o.files) {
        std::ofstream f(dir / name, std::ios::binary);
        f << text;
        if (!f) throw Error("failed writing " + (dir / name).string());
        artifacts.push_back(name);
    }
    record["artifacts"] = artifacts;
    if (o.heaters) record["heater_voltages"] = *o.heaters;
    record["metrics"] = o.metrics;

    std::string stem = command;
    for (char& c : stem) {
        if (c == ' ') c = '_';
    }
    std::ofstream f(dir / ("run_" + stem + ".json"), std::ios::binary);
    f << record.dump(2) << '\n';

    if (print_report) {
        out << o.report.str();
    } else {
        for (const auto& a : artifacts) out << (dir / a.get<std::string>()).string() << '\n';
    }
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [name, _] : presets()) out.push_back(name);
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantum frequency conversion waveguide simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string scenario_path, out_dir, format = "csv", input, state_name, preset;
    std::uint64_t seed_value = 0;
    app.add_option("--scenario", scenario_path, "Scenario YAML file");
    auto* seed_opt = app.add_option("--seed", seed_value, "Override the scenario seed");
    app.add_option("--out", out_dir, "Output directory (default: $QFCSIM_OUT, then the scenario's)");
    app.add_option("--format", format, "csv: list written files; report: print the report")
        ->check(CLI::IsMember({"csv", "report"}));

    std::map<std::string, CLI::App*> sub;
    for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
             {"spectrum", "Conversion spectrum at the scenario pump"},
             {"tune", "Sequential heater tuning with before/after calibration"},
             {"efficiency-curve", "Efficiency against pump power"},
             {"fit", "Fit eta_SFG to a measured efficiency curve"},
             {"noise", "Pump noise budget and power-law exponents"},
             {"tomography", "Time-bin qubit tomography"},
             {"visibility", "Two-photon visibility bound and four-branch minimum"},
             {"reproduce", "Regenerate a named figure preset"}}) {
        sub[name] = app.add_subcommand(name, help);
    }
    sub["fit"]->add_option("--input", input, "CSV with columns pump, eta")->required();
    sub["tomography"]->add_option("--input", input, "Counts CSV (phase_setting, bin, counts)");
    sub["tomography"]->add_option("--state", state_name, "Target state for the fidelity");
    sub["reproduce"]->add_option("preset", preset, "Preset name")->required()->check(
        CLI::IsMember(preset_names()));

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    std::string command;
    for (const auto& [name, s] : sub) {
        if (s->parsed()) command = name;
    }

    std::string source;
    try {
        const std::optional<std::uint64_t> seed =
            *seed_opt ? std::optional<std::uint64_t>(seed_value) : std::nullopt;
        Scenario s;
        if (!scenario_path.empty()) {
            source = scenario_path + ": ";
            s = load_scenario(scenario_path, seed);
            source.clear();
        } else if (command == "reproduce") {
            s = parse_scenario(presets().at(preset), "preset " + preset, seed);
        } else if (command == "tomography" && !input.empty()) {
            s = parse_scenario(presets::fig4d, "preset fig4d", seed);
        } else {
            err << "qfcsim: --scenario is required for " << command << "\n";
            return kUsageError;
        }

        std::optional<BasisState> state;
        if (!state_name.empty()) {
            state = parse_state(state_name);
            if (!state) throw ConfigError("unknown state '" + state_name + "'");
        }

        Output o;
        std::string label = command;
        if (command == "spectrum") cmd_spectrum(s, o);
        else if (command == "tune") cmd_tune(s, o);
        else if (command == "efficiency-curve") efficiency_curve(s, o, "efficiency_curve.csv");
        else if (command == "fit") cmd_fit(s, o, input);
        else if (command == "noise") noise_table(s, o, "noise.csv");
        else if (command == "visibility") cmd_visibility(s, o);
        else if (command == "tomography") {
            if (!input.empty()) tomography_from_counts(o, input, state);
            else tomography_simulated(s, o, "tomography.csv", true);
        } else if (command == "reproduce") {
            run_preset(preset, s, o);
            label = "reproduce " + preset;
        }

        fs::path dir = out_dir;
        if (dir.empty()) {
            if (const char* env = std::getenv("QFCSIM_OUT"); env && *env) dir = env;
        }
        if (dir.empty()) dir = s.output_dir;
        if (dir.empty()) dir = ".";
        persist(dir, label, s, o, out, format == "report");
        return kOk;
    } catch (const ConfigError& e) {
        err << "qfcsim: " << source << e.what() << "\n";
        return kUsageError;
    } catch (const DataError& e) {
        err << "qfcsim: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        err << "qfcsim: " << command << " failed: " << e.what() << "\n";
        return kFailure;
    }
}

}  // namespace qfc::cli
