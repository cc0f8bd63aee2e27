#include "qfc/scenario.hpp"

#include "qfc/error.hpp"
#include "qfc/units.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qfc {

using units::Quantity;

std::vector<double> SweepSpec::values() const {
    std::vector<double> out;
    if (points == 1) return {start};
    for (int i = 0; i < points; ++i) out.push_back(start + (stop - start) * i / (points - 1));
    return out;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t substream_seed(std::uint64_t seed, std::string_view name) {
    // splitmix64 finaliser over seed xor name hash.
    std::uint64_t z = seed ^ fnv1a64(name);
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

bool Scenario::stochastic() const {
    return disorder.sigma_step > 0.0 || quantum.sampling == Sampling::Poisson;
}

std::string Scenario::hash() const {
    std::string data = canonical;
    data += "\nseed=";
    data += seed ? std::to_string(*seed) : "none";
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

std::uint64_t Scenario::require_seed() const {
    if (!seed) throw ConfigError("a seed is required (set 'seed' or pass --seed)");
    return *seed;
}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

// Mapping reader that remembers which keys were consumed, so that typos are
// reported instead of silently ignored.
class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsMap()) {
            throw ConfigError("section '" + path_ + "' must be a mapping", line_of(node_));
        }
    }

    bool present() const { return static_cast<bool>(node_); }
    int line() const { return line_of(node_); }
    bool has(const std::string& key) const { return node_ && lookup(key); }

    YAML::Node get(const std::string& key) {
        used_.insert(key);
        return node_ ? lookup(key) : YAML::Node(YAML::NodeType::Undefined);
    }

    std::string where(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    double quantity(const std::string& key, Quantity q, std::optional<double> fallback = {}) {
        auto n = get(key);
        if (!n) {
            if (fallback) return *fallback;
            throw ConfigError("missing required field '" + where(key) + "'", line());
        }
        return parse(n, q, where(key));
    }

    static double parse(const YAML::Node& n, Quantity q, const std::string& what) {
        if (!n.IsScalar()) throw ConfigError("'" + what + "' must be a scalar", line_of(n));
        try {
            return units::parse_quantity(q, n.Scalar());
        } catch (const ConfigError& e) {
            throw ConfigError(what + ": " + e.what(), line_of(n));
        }
    }

    std::vector<double> quantities(const std::string& key, Quantity q,
                                   std::vector<double> fallback) {
        auto n = get(key);
        if (!n) return fallback;
        std::vector<double> out;
        if (n.IsScalar()) return {parse(n, q, where(key))};
        if (!n.IsSequence()) throw ConfigError("'" + where(key) + "' must be a list", line_of(n));
        for (const auto& item : n) out.push_back(parse(item, q, where(key)));
        return out;
    }

    long long integer(const std::string& key, long long fallback) {
        auto n = get(key);
        if (!n) return fallback;
        const double v = parse(n, Quantity::Dimensionless, where(key));
        if (v != std::floor(v) || std::abs(v) > 1e15) {
            throw ConfigError("'" + where(key) + "' must be an integer", line_of(n));
        }
        return static_cast<long long>(v);
    }

    bool boolean(const std::string& key, bool fallback) {
        auto n = get(key);
        if (!n) return fallback;
        try {
            return n.as<bool>();
        } catch (const YAML::Exception&) {
            throw ConfigError("'" + where(key) + "' must be true or false", line_of(n));
        }
    }

    std::string text(const std::string& key, const std::string& fallback) {
        auto n = get(key);
        if (!n) return fallback;
        if (!n.IsScalar()) throw ConfigError("'" + where(key) + "' must be a scalar", line_of(n));
        return n.Scalar();
    }

    template <class E>
    E choice(const std::string& key, std::initializer_list<std::pair<std::string_view, E>> opts,
             E fallback) {
        auto n = get(key);
        if (!n) return fallback;
        const std::string v = n.IsScalar() ? n.Scalar() : "";
        for (const auto& [name, value] : opts) {
            if (v == name) return value;
        }
        std::string allowed;
        for (const auto& o : opts) allowed += (allowed.empty() ? "" : ", ") + std::string(o.first);
        throw ConfigError("'" + where(key) + "' must be one of " + allowed, line_of(n));
    }

    Section child(const std::string& key) { return Section(get(key), where(key)); }

    Section required(const std::string& key) {
        if (!has(key)) throw ConfigError("missing required section '" + where(key) + "'", line());
        return child(key);
    }

    void finish() const {
        if (!node_) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.Scalar();
            if (!used_.count(key)) {
                throw ConfigError("unknown field '" + where(key) + "'", line_of(kv.first));
            }
        }
    }

private:
    // Const access so that probing a missing key never inserts it.
    YAML::Node lookup(const std::string& key) const {
        const YAML::Node& n = node_;
        return n[key];
    }

    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

nlohmann::json to_json(const YAML::Node& n) {
    switch (n.Type()) {
        case YAML::NodeType::Map: {
            nlohmann::json obj = nlohmann::json::object();
            for (const auto& kv : n) obj[kv.first.Scalar()] = to_json(kv.second);
            return obj;
        }
        case YAML::NodeType::Sequence: {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& item : n) arr.push_back(to_json(item));
            return arr;
        }
        case YAML::NodeType::Scalar: return n.Scalar();
        default: return nullptr;
    }
}

SweepSpec read_sweep(Section s, Quantity q, SweepSpec fallback) {
    if (!s.present()) return fallback;
    SweepSpec out;
    out.start = s.quantity("start", q, fallback.start);
    out.stop = s.quantity("stop", q, fallback.stop);
    out.points = static_cast<int>(s.integer("points", fallback.points));
    s.finish();
    if (out.points < 1 || (out.points > 1 && !(out.stop > out.start))) {
        throw ConfigError("sweep needs points >= 1 and stop > start", s.line());
    }
    return out;
}

ModeDispersion read_mode(Section s, ModeLabel label) {
    ModeDispersion m;
    m.label = label;
    m.reference_wavelength = s.quantity("reference", Quantity::Length);
    m.coefficients = s.quantities("coefficients", Quantity::Dimensionless, {});
    m.lambda_min = s.quantity("min", Quantity::Length);
    m.lambda_max = s.quantity("max", Quantity::Length);
    s.finish();
    return m;
}

void read_dispersion(Section s, Scenario& out) {
    const int line = s.line();
    const auto kind = s.text("model", "linear");
    out.signal_wavelength = s.quantity("signal_wavelength", Quantity::Length);
    const double pump_wavelength = s.quantity("pump_wavelength", Quantity::Length);
    out.pump.wavelength = pump_wavelength;
    if (kind == "linear") {
        out.dispersion = make_linear_fixture(
            out.signal_wavelength, pump_wavelength,
            s.quantity("n_1550", Quantity::Dimensionless, 2.0),
            s.quantity("group_index_1550", Quantity::Dimensionless, 3.5),
            s.quantity("group_index_780", Quantity::Dimensionless, 5.7));
    } else if (kind == "polynomial") {
        auto modes = s.required("modes");
        out.dispersion.modes = {read_mode(modes.required("TE1550"), ModeLabel::TE1550),
                                read_mode(modes.required("Pump1550"), ModeLabel::Pump1550),
                                read_mode(modes.required("TM780"), ModeLabel::TM780)};
        modes.finish();
        out.dispersion.group_index_780 = s.quantity("group_index_780", Quantity::Dimensionless, 5.7);
    } else {
        throw ConfigError("dispersion.model must be 'linear' or 'polynomial'", line);
    }
    s.finish();
    try {
        validate(out.dispersion);
        out.dispersion.dispersion_factor =
            compute_dispersion_factor(out.dispersion, pump_wavelength, out.signal_wavelength);
    } catch (const Error& e) {
        throw ConfigError(std::string("dispersion: ") + e.what(), line);
    }
}

}  // namespace

Scenario parse_scenario(std::string_view yaml, std::string_view source,
                        std::optional<std::uint64_t> seed_override) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml));
    } catch (const YAML::ParserException& e) {
        throw ConfigError(std::string(source) + ": " + e.msg, e.mark.line + 1);
    }
    if (!root || root.IsNull()) throw ConfigError(std::string(source) + ": empty scenario", 1);
    Section top(root, "");

    Scenario s;
    try {
        auto doc = to_json(root);
        doc.erase("seed");
        s.canonical = doc.dump();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("cannot canonicalise scenario: ") + e.what());
    }

    if (top.has("seed")) {
        auto n = top.get("seed");
        try {
            s.seed = n.as<std::uint64_t>();
        } catch (const YAML::Exception&) {
            throw ConfigError("seed must be a non-negative integer", line_of(n));
        }
    }
    if (seed_override) s.seed = seed_override;

    // Required blocks first so the diagnostic names the missing section.
    auto wg = top.required("waveguide");
    auto disp = top.required("dispersion");

    s.waveguide.length = wg.quantity("length", Quantity::Length);
    s.waveguide.loss_1550 = wg.quantity("loss_1550", Quantity::Attenuation, 0.0);
    s.waveguide.loss_780 = wg.quantity("loss_780", Quantity::Attenuation, 0.0);
    s.waveguide.eta_sfg = wg.quantity("eta_sfg", Quantity::NormalizedEfficiency);
    const double cell = wg.quantity("cell_size", Quantity::Length, 20e-6);
    const double cells = s.waveguide.length / cell;
    if (!(cell > 0.0) || std::abs(cells - std::round(cells)) > 1e-6 || cells < 1) {
        throw ConfigError("waveguide.cell_size must divide waveguide.length", wg.line());
    }
    s.waveguide.profile =
        MismatchProfile::uniform(s.waveguide.length, static_cast<size_t>(std::llround(cells)));
    wg.finish();
    try {
        validate(s.waveguide);
    } catch (const Error& e) {
        throw ConfigError(std::string("waveguide: ") + e.what(), wg.line());
    }

    read_dispersion(std::move(disp), s);

    auto pump = top.child("pump");
    s.pump.power = pump.quantity("power", Quantity::Power, 20e-3);
    s.pump.wavelength = pump.quantity("wavelength", Quantity::Length, s.pump.wavelength);
    s.pump.direction = pump.choice<PumpDirection>(
        "direction", {{"forward", PumpDirection::Forward}, {"backward", PumpDirection::Backward}},
        PumpDirection::Forward);
    s.pump.process =
        pump.choice<Process>("process", {{"sfg", Process::SFG}, {"dfg", Process::DFG}},
                             Process::SFG);
    s.pump_sweep = read_sweep(pump.child("sweep"), Quantity::Power, s.pump_sweep);
    pump.finish();

    auto heaters = top.child("heaters");
    s.heaters.start = heaters.quantity("start", Quantity::Length, 0.0);
    s.heaters.span = heaters.quantity("span", Quantity::Length, 0.4e-3);
    s.heaters.response = heaters.quantity("response", Quantity::HeaterResponse, 500.0);
    s.heaters.v_max = heaters.quantity("v_max", Quantity::Voltage, 5.0);
    const long long count = heaters.integer(
        "count", static_cast<long long>(std::floor((s.waveguide.length - s.heaters.start) /
                                                   s.heaters.span + 1e-9)));
    s.heaters.voltages = heaters.quantities("voltages", Quantity::Voltage,
                                            std::vector<double>(static_cast<size_t>(count), 0.0));
    if (static_cast<long long>(s.heaters.voltages.size()) != count) {
        throw ConfigError("heaters.voltages must list one value per heater", heaters.line());
    }
    heaters.finish();
    try {
        validate(s.heaters, s.waveguide.length, cell);
    } catch (const Error& e) {
        throw ConfigError(std::string("heaters: ") + e.what(), heaters.line());
    }

    auto disorder = top.child("disorder");
    s.disorder.cell_size = cell;
    s.disorder.sigma_step = disorder.quantity("sigma_step", Quantity::Wavenumber, 0.0);
    s.disorder.correlation_length =
        disorder.quantity("correlation_length", Quantity::Length, 0.4e-3);
    disorder.finish();
    if (!(s.disorder.sigma_step >= 0.0 && s.disorder.correlation_length >= 0.0)) {
        throw ConfigError("disorder parameters must be >= 0", disorder.line());
    }

    auto drift = top.child("drift");
    s.drift.uniform = drift.quantity("uniform", Quantity::DriftCoefficient, 0.0);
    s.drift.gradient = drift.quantity("gradient", Quantity::DriftCoefficient, 0.0);
    s.drift.decay_length = drift.quantity("decay_length", Quantity::Length, s.waveguide.length);
    drift.finish();

    auto tuning = top.child("tuning");
    s.tuning.pump_power = tuning.quantity("pump_power", Quantity::Power, 1e-3);
    s.tuning.options.passes = static_cast<int>(tuning.integer("passes", 2));
    s.tuning.options.residual_stage = tuning.boolean("residual_stage", true);
    s.tuning.options.voltage_tolerance =
        tuning.quantity("voltage_tolerance", Quantity::Voltage, 0.01);
    s.tuning.options.coarse_points = static_cast<int>(tuning.integer("coarse_points", 9));
    tuning.finish();
    if (s.tuning.options.passes < 1 || s.tuning.options.coarse_points < 3 ||
        !(s.tuning.options.voltage_tolerance > 0.0)) {
        throw ConfigError("tuning needs passes >= 1, coarse_points >= 3, voltage_tolerance > 0",
                          tuning.line());
    }

    auto spectrum = top.child("spectrum");
    s.spectrum.center = spectrum.quantity("center", Quantity::Length, s.signal_wavelength);
    s.spectrum.half_span = spectrum.quantity(
        "half_span", Quantity::Length,
        5.0 * ideal_bandwidth(s.dispersion.dispersion_factor, s.waveguide.length));
    s.spectrum.points = static_cast<int>(spectrum.integer("points", 201));
    spectrum.finish();
    if (s.spectrum.points < 3 || !(s.spectrum.half_span > 0.0)) {
        throw ConfigError("spectrum needs points >= 3 and half_span > 0", spectrum.line());
    }

    auto noise = top.child("noise");
    auto& nm = s.noise.model;
    nm.linear_coefficient = noise.quantity("linear_coefficient", Quantity::InversePower, 5e-3);
    nm.eta_nl = noise.quantity("eta_nl", Quantity::NonlinearCoefficient, 200.0);
    nm.length = noise.quantity("length", Quantity::Length, s.waveguide.length);
    nm.sfwm_bandwidth = noise.quantity("sfwm_bandwidth", Quantity::Length, 30e-9);
    s.noise.detunings = noise.quantities("detunings", Quantity::Length, s.noise.detunings);
    s.noise.powers = read_sweep(noise.child("powers"), Quantity::Power, s.noise.powers);
    s.noise.raman_detuning = noise.quantity("raman_detuning", Quantity::Length, 20e-9);
    s.noise.upconvert_flux = noise.quantity("upconvert_flux", Quantity::Dimensionless, 1e-4);
    auto raman = noise.child("raman");
    auto& rp = s.noise.raman;
    rp.peak_gain = raman.quantity("peak_gain", Quantity::RamanGain, rp.peak_gain);
    rp.solid_angle = raman.quantity("solid_angle", Quantity::SolidAngle, rp.solid_angle);
    rp.background_ratio =
        raman.quantity("background_ratio", Quantity::Dimensionless, rp.background_ratio);
    rp.phonon_frequency =
        2.0 * units::pi * raman.quantity("phonon_frequency", Quantity::Frequency, 10.5e12);
    rp.temperature = raman.quantity("temperature", Quantity::Temperature, rp.temperature);
    rp.n_eff = raman.quantity("n_eff", Quantity::Dimensionless, rp.n_eff);
    raman.finish();
    noise.finish();
    try {
        validate(rp);
    } catch (const Error& e) {
        throw ConfigError(std::string("noise.raman: ") + e.what(), raman.line());
    }

    auto quantum = top.child("quantum");
    auto& q = s.quantum;
    q.analyzer.visibility =
        quantum.quantity("analyzer_visibility", Quantity::Dimensionless, q.analyzer.visibility);
    q.analyzer.phase_error = quantum.quantity("phase_error", Quantity::Angle, q.analyzer.phase_error);
    q.pairs_per_setting =
        quantum.quantity("pairs_per_setting", Quantity::Dimensionless, q.pairs_per_setting);
    q.sampling = quantum.choice<Sampling>(
        "sampling", {{"poisson", Sampling::Poisson}, {"expected", Sampling::Expected}},
        Sampling::Poisson);
    q.v_idler = quantum.quantity("v_idler", Quantity::Dimensionless, q.v_idler);
    q.v_signal = quantum.quantities("v_signal", Quantity::Dimensionless, q.v_signal);
    quantum.finish();
    if (!(q.analyzer.visibility >= 0.0 && q.analyzer.visibility <= 1.0) ||
        !(q.pairs_per_setting > 0.0)) {
        throw ConfigError("quantum needs analyzer_visibility in [0, 1] and pairs_per_setting > 0",
                          quantum.line());
    }

    auto output = top.child("output");
    s.output_dir = output.text("directory", "");
    output.finish();

    top.get("seed");
    top.finish();

    if (s.stochastic() && !s.seed) {
        throw ConfigError("a seed is required: the scenario enables " +
                              std::string(s.disorder.sigma_step > 0.0 ? "disorder"
                                                                      : "Poisson sampling"),
                          1);
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path,
                       std::optional<std::uint64_t> seed_override) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open scenario " + path.string());
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_scenario(buf.str(), path.string(), seed_override);
}

WaveguideSpec disordered_waveguide(const Scenario& s) {
    WaveguideSpec out = s.waveguide;
    if (s.disorder.sigma_step > 0.0) {
        DisorderSpec d = s.disorder;
        d.seed = substream_seed(s.require_seed(), "disorder");
        out.profile = generate_disorder(d, s.waveguide.length);
    }
    return out;
}

}  // namespace qfc
