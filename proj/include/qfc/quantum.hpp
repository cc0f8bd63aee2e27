#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>

namespace qfc {

using Complex = std::complex<double>;

// Amplitude coefficients of the two splitters of one unbalanced
// interferometer.
struct SplitterPair {
    double T1 = 0.0, R1 = 0.0, T2 = 0.0, R2 = 0.0;

    // From intensity transmissions T1^2, T2^2.
    static SplitterPair from_intensity(double t1_squared, double t2_squared);
};

// Throws DomainError unless T^2 + R^2 = 1 within 1e-12 and all are >= 0.
void validate(const SplitterPair& pair);

struct TimeBinQubit {
    Complex early{1.0, 0.0};
    Complex late{0.0, 0.0};
};

void validate(const TimeBinQubit& q);

// |+-> = (|e> +- |l>)/sqrt2, |L>/|R> = (|e> +- i|l>)/sqrt2.
enum class BasisState { Early, Late, Plus, Minus, Left, Right };

TimeBinQubit basis_state(BasisState s);

// 2x2 density matrix in the (|e>, |l>) basis.
struct DensityMatrix {
    std::array<std::array<Complex, 2>, 2> m{};

    Complex& operator()(int r, int c) { return m[r][c]; }
    const Complex& operator()(int r, int c) const { return m[r][c]; }

    static DensityMatrix pure(const TimeBinQubit& q);
    static DensityMatrix mixed();  // I/2
    static DensityMatrix from_bloch(double x, double y, double z);

    double trace() const { return m[0][0].real() + m[1][1].real(); }
    std::array<double, 2> eigenvalues() const;  // ascending, Hermitian part
    std::array<double, 3> bloch() const;
};

// Trace 1 within 1e-9, Hermitian within 1e-12, eigenvalues >= -1e-9.
bool is_physical(const DensityMatrix& rho);
void validate(const DensityMatrix& rho);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

// Central and side coincidence peaks of a Franson measurement, relative to
// an ideal central peak of 1: center = (1 + V cos phi)/2, each side peak 1/4.
struct FransonPeaks {
    double center = 0.0;
    double side = 0.0;
};

FransonPeaks franson_coincidence(double phase_sum, double visibility);

// 2 T1 T2 R1 R2 / (T1^2 T2^2 + R1^2 R2^2).
double single_photon_visibility(const SplitterPair& pair);

// 2 prod(T R) / (prod T^2 + prod R^2) over all four splitters.
double two_photon_visibility(const SplitterPair& idler, const SplitterPair& signal);

// 1 / (2 / (V_i V_s) - 1). The printed form of this bound,
// 2 / (2 / (V_i V_s) - 2), exceeds 1 for realistic inputs and is not used.
double min_two_photon_visibility(double v_idler, double v_signal);

// Solves 2t/(t^2+1) = V for both roots t = T1 T2 / (R1 R2) per
// interferometer and returns the smallest two_photon_visibility over the
// four combinations.
double enumerated_min_two_photon_visibility(double v_idler, double v_signal);

// Analyzer imperfections: fringe visibility and a phase offset added to
// every setting.
struct Analyzer {
    double visibility = 1.0;
    double phase_error = 0.0;
};

// One output port of a balanced unbalanced-interferometer analyzer:
// p_e = rho_ee/4, p_ll = rho_ll/4,
// p_l = (1 - 2 V Re(rho_el e^{-i(phi + delta)}))/4 for unit trace.
// For a pure state p_l = |a_l - e^{-i phi} a_e|^2 / 4, so phi = 0 projects on
// |->, pi on |+>, pi/2 on |L>, 3pi/2 on |R>. The other port carries the
// complement, so the two ports together sum to 1 at every phi.
struct AnalyzerBins {
    double early = 0.0;
    double late = 0.0;
    double late_late = 0.0;

    double sum() const { return early + late + late_late; }
};

AnalyzerBins analyzer_bins(const DensityMatrix& rho, double phase, const Analyzer& analyzer = {});
AnalyzerBins analyzer_bins(const TimeBinQubit& q, double phase, const Analyzer& analyzer = {});

// Settings in the order 0, pi, pi/2, 3pi/2; bins in the order e, l, ll.
inline constexpr std::array<double, 4> kAnalyzerPhases{0.0, 3.14159265358979323846,
                                                       1.57079632679489661923,
                                                       4.71238898038468985769};
using RawBins = std::array<std::array<std::int64_t, 3>, 4>;

struct CountRecord {
    std::int64_t n0 = 0, n1 = 0, plus = 0, minus = 0, left = 0, right = 0;
    std::optional<RawBins> raw;
};

// N0 = n(0,e) + n(pi,e), N1 = n(0,ll) + n(pi,ll), N- = n(0,l), N+ = n(pi,l),
// NL = n(pi/2,l), NR = n(3pi/2,l). Throws DataError on negative bins.
CountRecord projector_counts(const RawBins& bins);

// Rounded expected bins for `pairs` events per setting.
RawBins expected_bins(const DensityMatrix& rho, double pairs, const Analyzer& analyzer = {});

// Poisson-sampled bins with mean `pairs` times the analyzer probability.
RawBins sample_bins(const DensityMatrix& rho, double pairs, std::mt19937_64& rng,
                    const Analyzer& analyzer = {});

struct Stokes {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
};

// S0 = N0 + N1, S1 = N+ - N-, S2 = NL - NR, S3 = N0 - N1.
// Throws NoSignalError when S0 = 0.
Stokes stokes(const CountRecord& rec);

// (I + (S1 sx + S2 sy + S3 sz)/S0)/2; may have a negative eigenvalue.
DensityMatrix linear_reconstruct(const Stokes& s);

// Negative eigenvalues set to zero, trace renormalised.
DensityMatrix clip_to_physical(const DensityMatrix& rho);

// Poisson negative log-likelihood per count, with the six projector
// probabilities tr(rho P_k)/3 sharing a single normalisation.
double negative_log_likelihood(const CountRecord& rec, const DensityMatrix& rho);

struct MleOptions {
    double gradient_tolerance = 1e-8;
    int max_iterations = 100000;
    double init_mixing = 1e-3;  // weight of I/2 in the starting point
};

struct MleResult {
    DensityMatrix rho;
    int iterations = 0;
    double gradient_norm = 0.0;
    double objective = 0.0;  // negative_log_likelihood at rho
};

// rho = G^dag G / tr(G^dag G) with G = [[t1, 0], [t3 + i t4, t2]], minimised
// with BFGS from the clipped linear estimate. Throws EstimationError when
// the gradient norm stays above tolerance after max_iterations.
MleResult mle_reconstruct(const CountRecord& rec, const MleOptions& options = {});

// <psi|rho|psi>.
double fidelity(const TimeBinQubit& psi, const DensityMatrix& rho);

}  // namespace qfc
