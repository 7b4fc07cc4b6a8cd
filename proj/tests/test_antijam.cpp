#include "loojam/antijam.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "loojam/channel.hpp"
#include "loojam/detector.hpp"
#include "loojam/jammer.hpp"
#include "loojam/ofdm.hpp"
#include "qpsk_util.hpp"

using loojam::cd;
using loojam::CorrectionSignal;
using loojam::DetectorConfig;
using loojam::OfdmSymbol;
using loojam::SubcarrierSymbol;

namespace {

// Oracle for the avoidance rule: explicit double loop over k and a generous
// span of z, deciding resonance by direct arithmetic instead of the
// implementation's integrality test.
bool resonates_oracle(double m_prime, double i_tilde, int n) {
    for (int k = 0; k < n; ++k)
        for (int z = -6; z <= 6; ++z)
            if (std::abs(m_prime + k + i_tilde - static_cast<double>(z) * n) <
                1e-9)
                return true;
    return false;
}

struct AttackedSymbol {
    std::vector<SubcarrierSymbol> content;
    OfdmSymbol received;
};

AttackedSymbol make_attacked(int n, std::uint64_t content_seed, int target,
                             double offset, double amplitude, double phase) {
    AttackedSymbol out;
    out.content = make_qpsk(n, content_seed);
    OfdmSymbol clean = loojam::synthesize(out.content, n);
    loojam::JammerConfig jc;
    jc.targets = {target};
    jc.offset = offset;
    jc.amplitude = amplitude;
    jc.phase = phase;
    out.received = loojam::apply_frequency_shift(clean, out.content, jc).attacked;
    return out;
}

}  // namespace

TEST_CASE("avoidance rule worked examples") {
    // n=8, attacked index 5: m'=1 resonates (k=2 gives 1+2+5=8), m'=0.5
    // never lands on a multiple of 8, and a full set of integer candidates
    // is exhausted because k sweeps every residue.
    auto got = loojam::select_m_prime_avoidance(5.0, 8, {1.0, 0.5});
    REQUIRE(got.has_value());
    CHECK(*got == doctest::Approx(0.5));

    CHECK(resonates_oracle(1.0, 5.0, 8));
    CHECK_FALSE(resonates_oracle(0.5, 5.0, 8));

    std::vector<double> integers;
    for (int j = 0; j < 8; ++j) integers.push_back(static_cast<double>(j));
    CHECK_FALSE(loojam::select_m_prime_avoidance(5.0, 8, integers).has_value());
}

TEST_CASE("avoidance rule matches the exhaustive oracle") {
    // Every integer candidate must be rejected and every non-integer one
    // accepted when i_tilde is an integer: k covers a complete residue
    // system mod n, so integer m' + i_tilde always meets some k.
    for (int n : {4, 8, 16}) {
        for (int i_tilde = 0; i_tilde < n; ++i_tilde) {
            for (int c = -2 * n; c <= 2 * n; ++c) {
                const double m_prime = static_cast<double>(c);
                CHECK(resonates_oracle(m_prime, i_tilde, n));
                CHECK_FALSE(loojam::select_m_prime_avoidance(
                                i_tilde, n, {m_prime})
                                .has_value());
            }
            for (double frac : {0.5, 0.25, -0.75, 1.5, -2.25}) {
                CHECK_FALSE(resonates_oracle(frac, i_tilde, n));
                auto got =
                    loojam::select_m_prime_avoidance(i_tilde, n, {frac});
                REQUIRE(got.has_value());
                CHECK(*got == frac);
            }
        }
    }
}

TEST_CASE("avoidance constraint forms are equivalent over a full index sweep") {
    // Both m' + k + i_tilde and k - i_tilde - m' hit a multiple of n for
    // some k exactly when m' + i_tilde is an integer, so the two constraint
    // forms must select identically.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> value(-10.0, 10.0);
    for (int n : {4, 8, 16, 64}) {
        for (int trial = 0; trial < 200; ++trial) {
            const double i_tilde = trial % 3 == 0
                                       ? std::round(value(rng))
                                       : value(rng);
            const double m_prime = trial % 2 == 0
                                       ? std::round(value(rng)) - i_tilde
                                       : value(rng);
            auto sum = loojam::select_m_prime_avoidance(
                i_tilde, n, {m_prime}, loojam::AvoidanceConstraint::kSumForm);
            auto diff = loojam::select_m_prime_avoidance(
                i_tilde, n, {m_prime},
                loojam::AvoidanceConstraint::kDifferenceForm);
            CHECK(sum.has_value() == diff.has_value());
        }
    }
}

TEST_CASE("candidate grid is ordered by ascending magnitude") {
    auto grid = loojam::avoidance_candidates(0.5, 1.5);
    REQUIRE(grid.size() == 7);
    CHECK(grid[0] == 0.0);
    CHECK(grid[1] == doctest::Approx(0.5));
    CHECK(grid[2] == doctest::Approx(-0.5));
    CHECK(grid[5] == doctest::Approx(1.5));
    CHECK(grid[6] == doctest::Approx(-1.5));
    CHECK_THROWS_AS(loojam::avoidance_candidates(0.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(loojam::avoidance_candidates(0.5, -1.0),
                    std::invalid_argument);

    // The grid plugged into the rule: 0 resonates for integer i_tilde, the
    // first half-integer survives.
    auto got = loojam::select_m_prime_avoidance(5.0, 8, grid);
    REQUIRE(got.has_value());
    CHECK(*got == doctest::Approx(0.5));
}

TEST_CASE("negation policy flips the estimate") {
    CHECK(loojam::select_m_prime_negation(0.5).m_prime == doctest::Approx(-0.5));
    CHECK(loojam::select_m_prime_negation(-1.25).m_prime == doctest::Approx(1.25));
    auto identity = loojam::select_m_prime_negation(0.0);
    CHECK(identity.m_prime == 0.0);
    CHECK(identity.amplitude == 1.0);
    CHECK(identity.phase == 0.0);
    CHECK(identity.policy == loojam::CorrectionPolicy::kOffsetNegation);
    CHECK_THROWS_AS(
        loojam::select_m_prime_negation(std::nan("")), std::invalid_argument);
}

TEST_CASE("identity correction leaves the waveform untouched") {
    auto sym = make_attacked(16, 3, 4, 0.5, 1.0, 0.2);
    CorrectionSignal identity;  // m'=0, A=1, phase=0
    OfdmSymbol out = loojam::apply_correction(sym.received, identity, 16);
    REQUIRE(out.samples.size() == sym.received.samples.size());
    for (std::size_t t = 0; t < out.samples.size(); ++t)
        CHECK(out.samples[t] == sym.received.samples[t]);
}

TEST_CASE("correction is multiplicative and invertible") {
    auto sym = make_attacked(32, 9, 7, -1.3, 2.0, 1.1);
    CorrectionSignal fwd{0.7, 2.3, 1.1, loojam::CorrectionPolicy::kOffsetNegation};
    CorrectionSignal back{-0.7, 1.0 / 2.3, -1.1,
                          loojam::CorrectionPolicy::kOffsetNegation};
    OfdmSymbol round_trip =
        loojam::apply_correction(loojam::apply_correction(sym.received, fwd, 32),
                                 back, 32);
    for (std::size_t t = 0; t < round_trip.samples.size(); ++t)
        CHECK(std::abs(round_trip.samples[t] - sym.received.samples[t]) <=
              1e-12);
}

TEST_CASE("correction input validation") {
    auto sym = make_attacked(16, 3, 4, 0.5, 1.0, 0.2);
    CorrectionSignal corr{-0.5, 1.0, 0.0,
                          loojam::CorrectionPolicy::kOffsetNegation};
    CHECK_THROWS_AS(loojam::apply_correction(sym.received, corr, 8),
                    std::invalid_argument);
    CorrectionSignal bad{-0.5, 0.0, 0.0,
                         loojam::CorrectionPolicy::kOffsetNegation};
    CHECK_THROWS_AS(loojam::apply_correction(sym.received, bad, 16),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        loojam::correct_symbol(sym.received, sym.content, 16, corr),
        std::invalid_argument);
}

TEST_CASE("exact negation restores orthogonality and the constellation") {
    // Fractional attack, amplitude and phase distorted; negation with the
    // exact offset plus bin-gain rescaling must hand back the clean symbol.
    const int n = 64;
    const int target = 5;
    auto sym = make_attacked(n, 21, target, 0.5, 2.0, 0.9);
    DetectorConfig cfg;

    auto est = loojam::estimate_offset(sym.received, sym.content, target, cfg);
    REQUIRE(est.found);
    REQUIRE(est.m_hat == doctest::Approx(0.5).epsilon(1e-9));

    OfdmSymbol corrected = loojam::correct_symbol(
        sym.received, sym.content, target,
        loojam::select_m_prime_negation(est.m_hat));
    auto outcome = loojam::verify_restoration(sym.received, corrected,
                                              sym.content, target, cfg);
    CHECK(outcome.psi_before == n - 1);
    CHECK(outcome.psi_after == 0);
    CHECK(outcome.residual_leakage <= 1e-9);

    // Full restoration: every analyzed bin matches the reference.
    auto bins = loojam::analyze_bins(corrected);
    for (int k = 0; k < n; ++k)
        CHECK(std::abs(bins[static_cast<std::size_t>(k)] -
                       sym.content[static_cast<std::size_t>(k)].value()) <=
              1e-9);
}

TEST_CASE("integer-offset attack is also undone by negation") {
    const int n = 32;
    const int target = 11;
    auto sym = make_attacked(n, 8, target, 3.0, 1.0, 0.4);
    DetectorConfig cfg;
    auto est = loojam::estimate_offset(sym.received, sym.content, target, cfg);
    REQUIRE(est.found);
    REQUIRE(est.m_hat == doctest::Approx(3.0));
    OfdmSymbol corrected = loojam::correct_symbol(
        sym.received, sym.content, target,
        loojam::select_m_prime_negation(est.m_hat));
    auto outcome = loojam::verify_restoration(sym.received, corrected,
                                              sym.content, target, cfg);
    CHECK(outcome.psi_before == 1);
    CHECK(outcome.psi_after == 0);
    CHECK(outcome.residual_leakage <= 1e-9);
}

TEST_CASE("imperfect negation leaks no more than the analytic kernel bound") {
    // m' misses the true offset by 0.01, so the corrected tone sits 0.01
    // bins away from its slot. Per-bin leakage onto bin k is then the
    // Dirichlet kernel |g(delta - (k - i))| / n, scaled by the restored
    // amplitude; the measurement must respect that bound bin by bin.
    const int n = 64;
    const int target = 5;
    const double delta = 0.01;
    auto sym = make_attacked(n, 33, target, 0.5, 1.0, 0.3);
    CorrectionSignal corr = loojam::select_m_prime_negation(0.5 + delta);
    OfdmSymbol corrected =
        loojam::correct_symbol(sym.received, sym.content, target, corr);

    auto bins = loojam::analyze_bins(corrected);
    // Rescaling pins bin i to the reference, dividing the tone's amplitude
    // by |g(-delta)/n|; the other bins keep kernel-shaped leakage.
    const double tone_amp =
        sym.content[target].amplitude /
        (std::abs(loojam::geometric_sum(-delta, n)) / n);
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
        if (k == target) continue;
        const double leak =
            std::abs(bins[static_cast<std::size_t>(k)] -
                     sym.content[static_cast<std::size_t>(k)].value());
        const double bound =
            tone_amp *
            std::abs(loojam::geometric_sum(-delta - (k - target), n)) / n;
        CHECK(leak <= bound * (1.0 + 1e-9) + 1e-12);
        worst = std::max(worst, leak);
    }
    MESSAGE("worst per-bin leakage at |m_hat - m| = 0.01, n = 64: ", worst);
    // Achieved bound, frozen: the nearest bins see about one percent of the
    // tone amplitude.
    CHECK(worst <= 0.02);
    CHECK(worst >= 0.005);
}

TEST_CASE("verification reports an unchanged symbol as unchanged") {
    const int n = 16;
    auto sym = make_attacked(n, 5, 3, 0.5, 1.0, 0.7);
    DetectorConfig cfg;
    auto outcome = loojam::verify_restoration(sym.received, sym.received,
                                              sym.content, 3, cfg);
    CHECK(outcome.psi_after == outcome.psi_before);
    CHECK(outcome.psi_before == n - 1);
}

TEST_CASE("correcting a clean signal inflicts the offset it guards against") {
    // Gating matters: a half-bin correction applied with no attack present
    // displaces the subcarrier itself and the detector sees full loss of
    // orthogonality.
    const int n = 16;
    const int target = 6;
    auto content = make_qpsk(n, 14);
    OfdmSymbol clean = loojam::synthesize(content, n);
    CorrectionSignal corr{0.5, 1.0, 0.0,
                          loojam::CorrectionPolicy::kOffsetNegation};
    OfdmSymbol hurt =
        loojam::correct_symbol(clean, content, target, corr, false);
    DetectorConfig cfg;
    auto outcome =
        loojam::verify_restoration(clean, hurt, content, target, cfg);
    CHECK(outcome.psi_before == 0);
    CHECK(outcome.psi_after == n - 1);
}
