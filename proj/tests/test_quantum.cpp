#include "qfc/error.hpp"
#include "qfc/quantum.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

using namespace qfc;

namespace {

constexpr double kPi = 3.14159265358979323846;

DensityMatrix random_ball_state(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> u;
    double x = n(rng), y = n(rng), z = n(rng);
    const double r = std::cbrt(u(rng)) / std::sqrt(x * x + y * y + z * z);
    return DensityMatrix::from_bloch(x * r, y * r, z * r);
}

CountRecord noiseless(const DensityMatrix& rho, double pairs, const Analyzer& a = {}) {
    return projector_counts(expected_bins(rho, pairs, a));
}

}  // namespace

TEST(Franson, Examples) {
    EXPECT_NEAR(franson_coincidence(0.0, 1.0).center, 1.0, 1e-15);
    EXPECT_NEAR(franson_coincidence(kPi, 1.0).center, 0.0, 1e-15);
    EXPECT_EQ(franson_coincidence(0.3, 0.7).side, 0.25);
    const double mx = franson_coincidence(0.0, 0.8).center;
    const double mn = franson_coincidence(kPi, 0.8).center;
    EXPECT_NEAR(mx / mn, 9.0, 1e-12);
    EXPECT_THROW(franson_coincidence(0.0, 1.1), DomainError);
    EXPECT_THROW(franson_coincidence(0.0, -0.1), DomainError);
}

TEST(Franson, FringeVisibilityEqualsParameter) {
    for (double v : {0.0, 0.3, 0.8, 0.944, 1.0}) {
        double mx = -1, mn = 2;
        for (int i = 0; i <= 720; ++i) {
            const double c = franson_coincidence(2 * kPi * i / 720, v).center;
            mx = std::max(mx, c);
            mn = std::min(mn, c);
        }
        EXPECT_NEAR((mx - mn) / (mx + mn), v, 1e-9);
    }
}

TEST(SinglePhotonVisibility, Examples) {
    EXPECT_NEAR(single_photon_visibility(SplitterPair::from_intensity(0.5, 0.5)), 1.0, 1e-15);
    const double v = single_photon_visibility(SplitterPair::from_intensity(0.6, 0.5));
    EXPECT_NEAR(v, 2 * std::sqrt(0.6 * 0.4) / (0.6 + 0.4), 1e-14);
    EXPECT_NEAR(v, 0.9798, 1e-4);
    auto p = SplitterPair::from_intensity(0.7, 0.35);
    SplitterPair swapped{p.R1, p.T1, p.R2, p.T2};
    EXPECT_NEAR(single_photon_visibility(p), single_photon_visibility(swapped), 1e-15);
    EXPECT_THROW(single_photon_visibility(SplitterPair{0.8, 0.8, 0.5, 0.5}), DomainError);
}

TEST(TwoPhotonVisibility, BalancedAndBoundCase) {
    auto b = SplitterPair::from_intensity(0.5, 0.5);
    EXPECT_NEAR(two_photon_visibility(b, b), 1.0, 1e-15);
    for (double t : {0.3, 0.8, 1.7}) {
        const double n = std::sqrt(1 + t * t);
        SplitterPair p{t / n, 1 / n, std::sqrt(0.5), std::sqrt(0.5)};
        const double vi = single_photon_visibility(p);
        EXPECT_NEAR(two_photon_visibility(p, p), min_two_photon_visibility(vi, vi), 1e-12);
    }
}

TEST(TwoPhotonVisibility, RandomPairsBounded) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        auto a = SplitterPair::from_intensity(u(rng), u(rng));
        auto b = SplitterPair::from_intensity(u(rng), u(rng));
        const double v = two_photon_visibility(a, b);
        if (std::isfinite(v)) EXPECT_LE(v, 1.0 + 1e-12);
    }
}

TEST(MinVisibility, PublishedNumbers) {
    EXPECT_NEAR(min_two_photon_visibility(0.944, 0.9832), 0.8659, 1e-4);
    EXPECT_NEAR(min_two_photon_visibility(0.944, 0.89), 0.7244, 1e-4);
    EXPECT_NEAR(enumerated_min_two_photon_visibility(0.944, 0.9832), 0.8755, 1e-4);
    EXPECT_GE(enumerated_min_two_photon_visibility(0.944, 0.9832),
              min_two_photon_visibility(0.944, 0.9832));
    EXPECT_GE(enumerated_min_two_photon_visibility(0.944, 0.89),
              min_two_photon_visibility(0.944, 0.89));
    EXPECT_THROW(min_two_photon_visibility(0.0, 0.9), DomainError);
    EXPECT_THROW(min_two_photon_visibility(0.9, 1.2), DomainError);
}

TEST(MinVisibility, BelowEnumerationOnGrid) {
    for (int i = 1; i <= 40; ++i) {
        for (int j = 1; j <= 40; ++j) {
            const double vi = i / 40.0, vs = j / 40.0;
            EXPECT_LE(min_two_photon_visibility(vi, vs),
                      enumerated_min_two_photon_visibility(vi, vs) + 1e-12)
                << vi << " " << vs;
        }
    }
}

TEST(Analyzer, SingleBinInputHasNoInterference) {
    const auto e = basis_state(BasisState::Early);
    for (double phi : {0.0, 0.4, kPi, 4.0}) {
        const auto b = analyzer_bins(e, phi);
        EXPECT_NEAR(b.early, 0.25, 1e-15);
        EXPECT_NEAR(b.late, 0.25, 1e-15);
        EXPECT_NEAR(b.late_late, 0.0, 1e-15);
    }
}

TEST(Analyzer, PhaseMapping) {
    const auto late = [](BasisState s, size_t setting) {
        return analyzer_bins(basis_state(s), kAnalyzerPhases[setting]).late;
    };
    EXPECT_NEAR(late(BasisState::Plus, 1), 0.5, 1e-15);
    EXPECT_NEAR(late(BasisState::Plus, 0), 0.0, 1e-15);
    EXPECT_NEAR(late(BasisState::Minus, 0), 0.5, 1e-15);
    EXPECT_NEAR(late(BasisState::Left, 2), 0.5, 1e-15);
    EXPECT_NEAR(late(BasisState::Left, 3), 0.0, 1e-15);
    EXPECT_NEAR(late(BasisState::Right, 3), 0.5, 1e-15);
}

TEST(Analyzer, PortsSumToOneAndAverage) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (int k = 0; k < 20; ++k) {
        TimeBinQubit q{{n(rng), n(rng)}, {n(rng), n(rng)}};
        const double s = std::sqrt(std::norm(q.early) + std::norm(q.late));
        q.early /= s;
        q.late /= s;
        double avg = 0.0;
        const int m = 64;
        for (int i = 0; i < m; ++i) {
            const double phi = 2 * kPi * i / m;
            const auto a = analyzer_bins(q, phi);
            const auto b = analyzer_bins(q, phi + kPi);  // other output port
            for (double p : {a.early, a.late, a.late_late}) {
                EXPECT_GE(p, 0.0);
                EXPECT_LE(p, 1.0);
            }
            EXPECT_LE(a.sum(), 1.0 + 1e-15);
            EXPECT_NEAR(a.sum() + b.late + b.early + b.late_late, 1.0, 1e-14);
            avg += a.late / m;
        }
        EXPECT_NEAR(avg, (std::norm(q.early) + std::norm(q.late)) / 4, 1e-14);
    }
}

TEST(ProjectorCounts, Mapping) {
    RawBins z{};
    auto r0 = projector_counts(z);
    EXPECT_EQ(r0.n0 + r0.n1 + r0.plus + r0.minus + r0.left + r0.right, 0);
    RawBins b{{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}, {10, 11, 12}}};
    auto r = projector_counts(b);
    EXPECT_EQ(r.n0, 5);
    EXPECT_EQ(r.n1, 9);
    EXPECT_EQ(r.minus, 2);
    EXPECT_EQ(r.plus, 5);
    EXPECT_EQ(r.left, 8);
    EXPECT_EQ(r.right, 11);
    b[2][1] = -1;
    EXPECT_THROW(projector_counts(b), DataError);
}

TEST(ProjectorCounts, IdealPlusForwardModel) {
    auto r = noiseless(DensityMatrix::pure(basis_state(BasisState::Plus)), 1e4);
    EXPECT_EQ(r.minus, 0);
    EXPECT_EQ(r.plus, 2 * r.left);
    EXPECT_EQ(r.plus, 2 * r.right);
}

TEST(ProjectorCounts, SeededSamplingReproducible) {
    const auto rho = DensityMatrix::from_bloch(0.3, -0.2, 0.5);
    std::mt19937_64 a(42), b(42);
    EXPECT_EQ(sample_bins(rho, 1e4, a), sample_bins(rho, 1e4, b));
}

TEST(Stokes, Examples) {
    CountRecord plus{50, 50, 100, 0, 50, 50, {}};
    auto s = stokes(plus);
    EXPECT_EQ(s.s0, 100);
    EXPECT_EQ(s.s1, 100);
    EXPECT_EQ(s.s2, 0);
    EXPECT_EQ(s.s3, 0);
    CountRecord early{100, 0, 50, 50, 50, 50, {}};
    s = stokes(early);
    EXPECT_EQ(s.s3, 100);
    const auto rho = linear_reconstruct(s);
    EXPECT_NEAR(rho(0, 0).real(), 1.0, 1e-15);
    CountRecord any{17, 29, 31, 5, 12, 40, {}};
    s = stokes(any);
    EXPECT_EQ(s.s0, 46);
    EXPECT_EQ(s.s1, 26);
    EXPECT_EQ(s.s2, -28);
    EXPECT_EQ(s.s3, -12);
    EXPECT_THROW(stokes(CountRecord{}), NoSignalError);
}

TEST(LinearReconstruct, Examples) {
    auto plus = linear_reconstruct({100, 100, 0, 0});
    EXPECT_NEAR(fidelity(basis_state(BasisState::Plus), plus), 1.0, 1e-15);
    auto mixed = linear_reconstruct({100, 0, 0, 0});
    EXPECT_LT(trace_distance(mixed, DensityMatrix::mixed()), 1e-15);
    auto bad = linear_reconstruct({100, 90, 90, 0});
    EXPECT_NEAR(bad.eigenvalues()[0], (1 - std::sqrt(2.0) * 0.9) / 2, 1e-12);
    EXPECT_NEAR(bad.trace(), 1.0, 1e-15);
    EXPECT_FALSE(is_physical(bad));
}

TEST(Mle, MatchesLinearForPhysicalCounts) {
    const auto rho = DensityMatrix::from_bloch(0.2, 0.4, -0.3);
    const auto rec = noiseless(rho, 1e8);
    const auto lin = linear_reconstruct(stokes(rec));
    const auto mle = mle_reconstruct(rec);
    EXPECT_LT(trace_distance(lin, mle.rho), 1e-6);
    EXPECT_LT(mle.gradient_norm, 1e-8);
    EXPECT_TRUE(is_physical(mle.rho));
}

TEST(Mle, UnphysicalRecordBeatsGridOracle) {
    // S = (100, 90, 90, 0): N0 = N1 = 50, N+ - N- = 90, NL - NR = 90.
    CountRecord rec{50, 50, 95, 5, 95, 5, {}};
    const auto mle = mle_reconstruct(rec);
    EXPECT_GE(mle.rho.eigenvalues()[0], -1e-9);
    EXPECT_TRUE(is_physical(mle.rho));
    const double clipped =
        negative_log_likelihood(rec, clip_to_physical(linear_reconstruct(stokes(rec))));
    EXPECT_LE(mle.objective, clipped + 1e-12);

    double best = 1e300;
    for (int a = 0; a <= 50; ++a) {
        for (int b = 0; b <= 50; ++b) {
            for (int c = -50; c <= 50; ++c) {
                for (int d = -50; d <= 50; ++d) {
                    const double t1 = 0.02 * a, t2 = 0.02 * b, t3 = 0.02 * c, t4 = 0.02 * d;
                    const double tau = t1 * t1 + t2 * t2 + t3 * t3 + t4 * t4;
                    if (tau == 0.0) continue;
                    DensityMatrix r;
                    r(0, 0) = (t1 * t1 + t3 * t3 + t4 * t4) / tau;
                    r(1, 1) = t2 * t2 / tau;
                    r(0, 1) = Complex(t3, -t4) * t2 / tau;
                    r(1, 0) = Complex(t3, t4) * t2 / tau;
                    best = std::min(best, negative_log_likelihood(rec, r));
                }
            }
        }
    }
    EXPECT_LE(mle.objective, best + 1e-12);
}

TEST(Mle, EqualCountsGiveMixedState) {
    CountRecord rec{100, 100, 100, 100, 100, 100, {}};
    EXPECT_LT(trace_distance(mle_reconstruct(rec).rho, DensityMatrix::mixed()), 1e-9);
}

TEST(Mle, NoSignal) { EXPECT_THROW(mle_reconstruct(CountRecord{}), NoSignalError); }

TEST(Mle, RoundTripNoiseless) {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 100; ++i) {
        const auto rho = random_ball_state(rng);
        const auto mle = mle_reconstruct(noiseless(rho, 1e8));
        EXPECT_LT(trace_distance(rho, mle.rho), 1e-3);
        EXPECT_TRUE(is_physical(mle.rho));
    }
}

TEST(Mle, UnphysicalLinearAlwaysMappedToPhysical) {
    std::mt19937_64 rng(77);
    int unphysical = 0;
    for (int i = 0; i < 200; ++i) {
        // Nearly pure states with few counts often invert outside the ball.
        auto b = random_ball_state(rng).bloch();
        const double r = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
        const auto rho = DensityMatrix::from_bloch(b[0] / r, b[1] / r, b[2] / r);
        const auto rec = projector_counts(sample_bins(rho, 200, rng));
        if (is_physical(linear_reconstruct(stokes(rec)))) continue;
        ++unphysical;
        const auto mle = mle_reconstruct(rec);
        EXPECT_GE(mle.rho.eigenvalues()[0], -1e-9);
        EXPECT_TRUE(is_physical(mle.rho));
    }
    EXPECT_GT(unphysical, 20);
}

TEST(Mle, PoissonRobustness) {
    std::mt19937_64 rng(9);
    std::vector<double> infid;
    for (int i = 0; i < 100; ++i) {
        auto b = random_ball_state(rng).bloch();
        const double r = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
        TimeBinQubit psi{{std::sqrt((1 + b[2] / r) / 2), 0.0}, {0.0, 0.0}};
        const double s = std::sqrt(std::max(0.0, (1 - b[2] / r) / 2));
        const double ph = std::atan2(b[1], b[0]);
        psi.late = std::polar(s, ph);
        // 2e4 pairs per setting puts 1e4 counts in each basis.
        const auto rec = projector_counts(sample_bins(DensityMatrix::pure(psi), 2e4, rng));
        infid.push_back(1.0 - fidelity(psi, mle_reconstruct(rec).rho));
    }
    std::nth_element(infid.begin(), infid.begin() + 50, infid.end());
    EXPECT_LT(infid[50], 0.01);
}

TEST(Fidelity, Examples) {
    const auto psi = basis_state(BasisState::Left);
    EXPECT_NEAR(fidelity(psi, DensityMatrix::pure(psi)), 1.0, 1e-15);
    EXPECT_NEAR(fidelity(psi, DensityMatrix::mixed()), 0.5, 1e-15);
    EXPECT_NEAR(fidelity(basis_state(BasisState::Early), DensityMatrix::mixed()), 0.5, 1e-15);
}

TEST(Fidelity, ImperfectAnalyzerPipeline) {
    const Analyzer a{0.89, 0.05};
    double mean = 0.0;
    for (auto s : {BasisState::Early, BasisState::Late, BasisState::Plus, BasisState::Minus,
                   BasisState::Left, BasisState::Right}) {
        const auto psi = basis_state(s);
        const auto mle = mle_reconstruct(noiseless(DensityMatrix::pure(psi), 1e8, a));
        const double f = fidelity(psi, mle.rho);
        if (s == BasisState::Early || s == BasisState::Late) {
            EXPECT_NEAR(f, 1.0, 1e-6);
        } else {
            EXPECT_NEAR(f, (1 + 0.89 * std::cos(0.05)) / 2, 1e-6);
        }
        mean += f / 6;
    }
    EXPECT_GT(mean, 0.956);
    EXPECT_LT(mean, 0.968);
}
