#include "qfc/quantum.hpp"

#include "qfc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qfc {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Projectors in record order: N0, N1, N+, N-, NL, NR.
std::array<TimeBinQubit, 6> projector_states() {
    return {basis_state(BasisState::Early), basis_state(BasisState::Late),
            basis_state(BasisState::Plus),  basis_state(BasisState::Minus),
            basis_state(BasisState::Left),  basis_state(BasisState::Right)};
}

std::array<double, 6> record_counts(const CountRecord& r) {
    return {double(r.n0), double(r.n1), double(r.plus), double(r.minus), double(r.left),
            double(r.right)};
}

}  // namespace

SplitterPair SplitterPair::from_intensity(double t1_squared, double t2_squared) {
    if (!(t1_squared >= 0.0 && t1_squared <= 1.0 && t2_squared >= 0.0 && t2_squared <= 1.0)) {
        throw DomainError("splitter intensity transmission must lie in [0, 1]");
    }
    return {std::sqrt(t1_squared), std::sqrt(1.0 - t1_squared), std::sqrt(t2_squared),
            std::sqrt(1.0 - t2_squared)};
}

void validate(const SplitterPair& p) {
    for (double v : {p.T1, p.R1, p.T2, p.R2}) {
        if (!(v >= 0.0)) throw DomainError("splitter coefficients must be >= 0");
    }
    if (std::abs(p.T1 * p.T1 + p.R1 * p.R1 - 1.0) > 1e-12 ||
        std::abs(p.T2 * p.T2 + p.R2 * p.R2 - 1.0) > 1e-12) {
        throw DomainError("splitter coefficients must satisfy T^2 + R^2 = 1");
    }
}

void validate(const TimeBinQubit& q) {
    if (std::abs(std::norm(q.early) + std::norm(q.late) - 1.0) > 1e-12) {
        throw DomainError("time-bin qubit is not normalised");
    }
}

TimeBinQubit basis_state(BasisState s) {
    switch (s) {
        case BasisState::Early: return {{1.0, 0.0}, {0.0, 0.0}};
        case BasisState::Late: return {{0.0, 0.0}, {1.0, 0.0}};
        case BasisState::Plus: return {{kInvSqrt2, 0.0}, {kInvSqrt2, 0.0}};
        case BasisState::Minus: return {{kInvSqrt2, 0.0}, {-kInvSqrt2, 0.0}};
        case BasisState::Left: return {{kInvSqrt2, 0.0}, {0.0, kInvSqrt2}};
        case BasisState::Right: return {{kInvSqrt2, 0.0}, {0.0, -kInvSqrt2}};
    }
    throw DomainError("unknown basis state");
}

DensityMatrix DensityMatrix::pure(const TimeBinQubit& q) {
    DensityMatrix r;
    r(0, 0) = q.early * std::conj(q.early);
    r(0, 1) = q.early * std::conj(q.late);
    r(1, 0) = q.late * std::conj(q.early);
    r(1, 1) = q.late * std::conj(q.late);
    return r;
}

DensityMatrix DensityMatrix::mixed() { return from_bloch(0.0, 0.0, 0.0); }

DensityMatrix DensityMatrix::from_bloch(double x, double y, double z) {
    DensityMatrix r;
    r(0, 0) = 0.5 * (1.0 + z);
    r(1, 1) = 0.5 * (1.0 - z);
    r(0, 1) = Complex(0.5 * x, -0.5 * y);
    r(1, 0) = Complex(0.5 * x, 0.5 * y);
    return r;
}

std::array<double, 2> DensityMatrix::eigenvalues() const {
    const double a = m[0][0].real(), d = m[1][1].real();
    const Complex b = 0.5 * (m[0][1] + std::conj(m[1][0]));
    const double mean = 0.5 * (a + d);
    const double rad = std::hypot(0.5 * (a - d), std::abs(b));
    return {mean - rad, mean + rad};
}

std::array<double, 3> DensityMatrix::bloch() const {
    const Complex off = 0.5 * (m[1][0] + std::conj(m[0][1]));
    const double t = trace();
    return {2.0 * off.real() / t, 2.0 * off.imag() / t, (m[0][0].real() - m[1][1].real()) / t};
}

bool is_physical(const DensityMatrix& rho) {
    if (std::abs(rho.trace() - 1.0) > 1e-9) return false;
    if (std::abs(rho(0, 0).imag()) > 1e-12 || std::abs(rho(1, 1).imag()) > 1e-12) return false;
    if (std::abs(rho(0, 1) - std::conj(rho(1, 0))) > 1e-12) return false;
    return rho.eigenvalues()[0] >= -1e-9;
}

void validate(const DensityMatrix& rho) {
    if (!is_physical(rho)) {
        const auto ev = rho.eigenvalues();
        std::ostringstream msg;
        msg << "density matrix is not physical (trace " << rho.trace() << ", eigenvalues "
            << ev[0] << ", " << ev[1] << ")";
        throw DomainError(msg.str());
    }
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    DensityMatrix d;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) d(r, c) = a(r, c) - b(r, c);
    }
    const auto ev = d.eigenvalues();
    return 0.5 * (std::abs(ev[0]) + std::abs(ev[1]));
}

FransonPeaks franson_coincidence(double phase_sum, double visibility) {
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw DomainError("visibility must lie in [0, 1]");
    }
    return {0.5 * (1.0 + visibility * std::cos(phase_sum)), 0.25};
}

double single_photon_visibility(const SplitterPair& p) {
    validate(p);
    const double t = p.T1 * p.T2, r = p.R1 * p.R2;
    return 2.0 * t * r / (t * t + r * r);
}

double two_photon_visibility(const SplitterPair& idler, const SplitterPair& signal) {
    validate(idler);
    validate(signal);
    const double t = idler.T1 * idler.T2 * signal.T1 * signal.T2;
    const double r = idler.R1 * idler.R2 * signal.R1 * signal.R2;
    return 2.0 * t * r / (t * t + r * r);
}

double min_two_photon_visibility(double v_idler, double v_signal) {
    if (!(v_idler > 0.0 && v_idler <= 1.0 && v_signal > 0.0 && v_signal <= 1.0)) {
        throw DomainError("single-photon visibilities must lie in (0, 1]");
    }
    const double bound = 1.0 / (2.0 / (v_idler * v_signal) - 1.0);
    if (!(bound > 0.0 && bound <= 1.0)) throw DomainError("visibility bound out of range");
    return bound;
}

double enumerated_min_two_photon_visibility(double v_idler, double v_signal) {
    min_two_photon_visibility(v_idler, v_signal);
    auto roots = [](double v) {
        const double s = std::sqrt(std::max(0.0, 1.0 - v * v));
        return std::array<double, 2>{(1.0 - s) / v, (1.0 + s) / v};
    };
    // Second splitter balanced, so t = T1 / R1.
    auto pair_for = [](double t) {
        const double n = std::sqrt(1.0 + t * t);
        return SplitterPair{t / n, 1.0 / n, kInvSqrt2, kInvSqrt2};
    };
    double best = 1.0;
    for (double ti : roots(v_idler)) {
        for (double ts : roots(v_signal)) {
            best = std::min(best, two_photon_visibility(pair_for(ti), pair_for(ts)));
        }
    }
    return best;
}

AnalyzerBins analyzer_bins(const DensityMatrix& rho, double phase, const Analyzer& analyzer) {
    const double ee = rho(0, 0).real(), ll = rho(1, 1).real();
    const Complex el = rho(0, 1);
    const Complex rot = std::polar(1.0, -(phase + analyzer.phase_error));
    const double late = 0.25 * (ee + ll - 2.0 * analyzer.visibility * (el * rot).real());
    return {0.25 * ee, std::max(0.0, late), 0.25 * ll};
}

AnalyzerBins analyzer_bins(const TimeBinQubit& q, double phase, const Analyzer& analyzer) {
    validate(q);
    return analyzer_bins(DensityMatrix::pure(q), phase, analyzer);
}

CountRecord projector_counts(const RawBins& bins) {
    for (size_t s = 0; s < bins.size(); ++s) {
        for (size_t j = 0; j < 3; ++j) {
            if (bins[s][j] < 0) {
                std::ostringstream msg;
                msg << "negative count in setting " << s << ", bin " << j;
                throw DataError(msg.str());
            }
        }
    }
    CountRecord r;
    r.n0 = bins[0][0] + bins[1][0];
    r.n1 = bins[0][2] + bins[1][2];
    r.minus = bins[0][1];
    r.plus = bins[1][1];
    r.left = bins[2][1];
    r.right = bins[3][1];
    r.raw = bins;
    return r;
}

RawBins expected_bins(const DensityMatrix& rho, double pairs, const Analyzer& analyzer) {
    RawBins out{};
    for (size_t s = 0; s < 4; ++s) {
        const auto p = analyzer_bins(rho, kAnalyzerPhases[s], analyzer);
        out[s] = {std::llround(pairs * p.early), std::llround(pairs * p.late),
                  std::llround(pairs * p.late_late)};
    }
    return out;
}

RawBins sample_bins(const DensityMatrix& rho, double pairs, std::mt19937_64& rng,
                    const Analyzer& analyzer) {
    auto draw = [&](double mean) -> std::int64_t {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<std::int64_t>(mean)(rng);
    };
    RawBins out{};
    for (size_t s = 0; s < 4; ++s) {
        const auto p = analyzer_bins(rho, kAnalyzerPhases[s], analyzer);
        out[s] = {draw(pairs * p.early), draw(pairs * p.late), draw(pairs * p.late_late)};
    }
    return out;
}

Stokes stokes(const CountRecord& r) {
    const double s0 = double(r.n0) + double(r.n1);
    if (!(s0 > 0.0)) throw NoSignalError("no counts in the e/ll bins (S0 = 0)");
    return {s0, double(r.plus) - double(r.minus), double(r.left) - double(r.right),
            double(r.n0) - double(r.n1)};
}

DensityMatrix linear_reconstruct(const Stokes& s) {
    if (!(s.s0 > 0.0)) throw NoSignalError("S0 must be positive");
    return DensityMatrix::from_bloch(s.s1 / s.s0, s.s2 / s.s0, s.s3 / s.s0);
}

DensityMatrix clip_to_physical(const DensityMatrix& rho) {
    auto b = rho.bloch();
    const double r = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
    if (r > 1.0) {
        for (double& v : b) v /= r;
    }
    return DensityMatrix::from_bloch(b[0], b[1], b[2]);
}

double negative_log_likelihood(const CountRecord& rec, const DensityMatrix& rho) {
    const auto n = record_counts(rec);
    const auto states = projector_states();
    double total = 0.0, f = 0.0;
    for (size_t k = 0; k < 6; ++k) {
        total += n[k];
        if (n[k] == 0.0) continue;
        const double p = fidelity(states[k], rho) / 3.0;
        if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
        f -= n[k] * std::log(p);
    }
    if (!(total > 0.0)) throw NoSignalError("count record is empty");
    return f / total;
}

namespace {

using Params = std::array<double, 4>;

DensityMatrix from_params(const Params& t) {
    // G^dag G for G = [[t1, 0], [z, t2]], z = t3 + i t4.
    const Complex z(t[2], t[3]);
    DensityMatrix r;
    r(0, 0) = t[0] * t[0] + std::norm(z);
    r(1, 1) = t[1] * t[1];
    r(0, 1) = std::conj(z) * t[1];
    r(1, 0) = z * t[1];
    const double tau = r.trace();
    for (auto& row : r.m) {
        for (auto& v : row) v /= tau;
    }
    return r;
}

Params to_params(const DensityMatrix& rho) {
    const double t2 = std::sqrt(rho(1, 1).real());
    const Complex z = rho(1, 0) / t2;
    const double t1 = std::sqrt(std::max(0.0, rho(0, 0).real() - std::norm(z)));
    return {t1, t2, z.real(), z.imag()};
}

struct Objective {
    std::array<double, 6> n{};
    std::array<TimeBinQubit, 6> states = projector_states();
    double total = 0.0;

    // Value and gradient of the normalised negative log-likelihood. With
    // M = G^dag G and tau = tr M, each projector term is
    // -n_k (log q_k - log tau), q_k = <psi_k|M|psi_k>.
    double operator()(const Params& t, Params& grad) const {
        const double tau = t[0] * t[0] + t[1] * t[1] + t[2] * t[2] + t[3] * t[3];
        double f = 0.0;
        grad.fill(0.0);
        for (size_t k = 0; k < 6; ++k) {
            if (n[k] == 0.0) continue;
            const Complex pe = states[k].early, pl = states[k].late;
            // q = <psi|G^dag G|psi> = |G psi|^2.
            const Complex g0 = t[0] * pe;
            const Complex g1 = Complex(t[2], t[3]) * pe + t[1] * pl;
            const double q = std::norm(g0) + std::norm(g1);
            if (!(q > 0.0)) return std::numeric_limits<double>::infinity();
            f -= n[k] * (std::log(q) - std::log(tau));
            // d|g1|^2 = 2 Re(conj(g1) dg1).
            const Params dq{2.0 * t[0] * std::norm(pe),
                            2.0 * (std::conj(g1) * pl).real(),
                            2.0 * (std::conj(g1) * pe).real(),
                            2.0 * (std::conj(g1) * Complex(0.0, 1.0) * pe).real()};
            for (size_t i = 0; i < 4; ++i) grad[i] -= n[k] * (dq[i] / q - 2.0 * t[i] / tau);
        }
        for (double& g : grad) g /= total;
        return f / total + std::log(3.0);
    }
};

double norm(const Params& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

MleResult mle_reconstruct(const CountRecord& rec, const MleOptions& options) {
    Objective obj;
    obj.n = record_counts(rec);
    for (double v : obj.n) {
        if (v < 0.0) throw DataError("negative projector count");
        obj.total += v;
    }
    const Stokes s = stokes(rec);

    const DensityMatrix clipped = clip_to_physical(linear_reconstruct(s));
    DensityMatrix start;
    const double eps = options.init_mixing;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            start(r, c) = (1.0 - eps) * clipped(r, c) + (r == c ? 0.5 * eps : 0.0);
        }
    }

    Params t = to_params(start);
    Params g;
    double f = obj(t, g);
    // Inverse Hessian approximation.
    std::array<Params, 4> H{};
    auto reset = [&] {
        const double scale = 0.5 * (t[0] * t[0] + t[1] * t[1] + t[2] * t[2] + t[3] * t[3]);
        for (size_t i = 0; i < 4; ++i) {
            H[i].fill(0.0);
            H[i][i] = scale;
        }
    };
    reset();

    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        if (norm(g) < options.gradient_tolerance) break;
        Params d{};
        for (size_t i = 0; i < 4; ++i) {
            for (size_t j = 0; j < 4; ++j) d[i] -= H[i][j] * g[j];
        }
        double slope = 0.0;
        for (size_t i = 0; i < 4; ++i) slope += d[i] * g[i];
        if (!(slope < 0.0)) {
            reset();
            for (size_t i = 0; i < 4; ++i) d[i] = -H[i][i] * g[i];
            slope = 0.0;
            for (size_t i = 0; i < 4; ++i) slope += d[i] * g[i];
        }
        double step = 1.0;
        Params tn, gn;
        double fn = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (size_t i = 0; i < 4; ++i) tn[i] = t[i] + step * d[i];
            fn = obj(tn, gn);
            if (std::isfinite(fn) && fn <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            reset();
            continue;
        }
        Params sv, yv;
        for (size_t i = 0; i < 4; ++i) {
            sv[i] = tn[i] - t[i];
            yv[i] = gn[i] - g[i];
        }
        double sy = 0.0;
        for (size_t i = 0; i < 4; ++i) sy += sv[i] * yv[i];
        if (sy > 1e-14 * norm(sv) * norm(yv)) {
            Params hy{};
            for (size_t i = 0; i < 4; ++i) {
                for (size_t j = 0; j < 4; ++j) hy[i] += H[i][j] * yv[j];
            }
            double yhy = 0.0;
            for (size_t i = 0; i < 4; ++i) yhy += yv[i] * hy[i];
            const double rho = 1.0 / sy;
            for (size_t i = 0; i < 4; ++i) {
                for (size_t j = 0; j < 4; ++j) {
                    H[i][j] += rho * ((1.0 + rho * yhy) * sv[i] * sv[j] - hy[i] * sv[j] -
                                      sv[i] * hy[j]);
                }
            }
        }
        t = tn;
        g = gn;
        f = fn;
    }

    const double gnorm = norm(g);
    if (gnorm >= options.gradient_tolerance) {
        std::ostringstream msg;
        msg << "MLE did not converge after " << iter << " iterations (gradient norm " << gnorm
            << ", objective " << f << ")";
        throw EstimationError(msg.str());
    }
    return {from_params(t), iter, gnorm, negative_log_likelihood(rec, from_params(t))};
}

double fidelity(const TimeBinQubit& psi, const DensityMatrix& rho) {
    const Complex e = psi.early, l = psi.late;
    const Complex v = std::conj(e) * (rho(0, 0) * e + rho(0, 1) * l) +
                      std::conj(l) * (rho(1, 0) * e + rho(1, 1) * l);
    return v.real();
}

}  // namespace qfc
