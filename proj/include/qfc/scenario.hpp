#pragma once

#include "qfc/dispersion.hpp"
#include "qfc/noise.hpp"
#include "qfc/propagation.hpp"
#include "qfc/quantum.hpp"
#include "qfc/tuner.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qfc {

struct SweepSpec {
    double start = 0.0;
    double stop = 0.0;
    int points = 0;

    std::vector<double> values() const;
};

struct SpectrumWindow {
    double center = 0.0;     // m; 0: the dispersion block's signal wavelength
    double half_span = 0.0;  // m; 0: five ideal bandwidths
    int points = 201;
};

struct TuningSpec {
    double pump_power = 1e-3;
    TuneOptions options;
};

struct NoiseSpec {
    NoiseModel model;
    RamanParams raman;
    std::vector<double> detunings{8e-9, 20e-9};
    SweepSpec powers{10e-3, 50e-3, 9};
    double raman_detuning = 20e-9;  // signal offset for the Raman estimate
    double upconvert_flux = 1e-4;   // counts/s/Hz fed to upconverted_noise
};

enum class Sampling { Poisson, Expected };

struct QuantumSpec {
    Analyzer analyzer{0.89, 0.05};
    double pairs_per_setting = 2e4;
    Sampling sampling = Sampling::Poisson;
    double v_idler = 0.944;
    std::vector<double> v_signal{0.9832, 0.89};
};

struct Scenario {
    std::optional<std::uint64_t> seed;

    WaveguideSpec waveguide;  // profile: uniform zero offsets on the cell grid
    double signal_wavelength = 0.0;
    DispersionModel dispersion;
    PumpConfig pump;
    SweepSpec pump_sweep{0.0, 80e-3, 81};
    HeaterArray heaters;
    DisorderSpec disorder;  // seed filled from the "disorder" substream
    DriftSpec drift;
    TuningSpec tuning;
    SpectrumWindow spectrum;
    NoiseSpec noise;
    QuantumSpec quantum;
    std::filesystem::path output_dir;

    // Canonical JSON of the parsed document without the seed: keys sorted,
    // scalars kept as written.
    std::string canonical;

    bool stochastic() const;
    // FNV-1a 64 of the canonical form and the effective seed, as 16 hex digits.
    std::string hash() const;
    std::uint64_t require_seed() const;  // throws ConfigError when unset
};

// Parses and validates a scenario. ConfigError carries the 1-based line of
// the offending node. `seed_override` replaces the document's seed.
Scenario parse_scenario(std::string_view yaml, std::string_view source = "<scenario>",
                        std::optional<std::uint64_t> seed_override = {});
Scenario load_scenario(const std::filesystem::path& path,
                       std::optional<std::uint64_t> seed_override = {});

// Waveguide with the seeded disorder applied (zero offsets when
// sigma_step = 0).
WaveguideSpec disordered_waveguide(const Scenario& s);

std::uint64_t fnv1a64(std::string_view data);

// Independent seed for a named consumer: adding a stream does not shift
// the others.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name);

}  // namespace qfc
