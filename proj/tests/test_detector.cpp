#include "loojam/detector.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "loojam/channel.hpp"
#include "loojam/jammer.hpp"
#include "qpsk_util.hpp"

using loojam::cd;
using loojam::DetectorConfig;
using loojam::LooVerdict;
using loojam::OfdmSymbol;
using loojam::SubcarrierSymbol;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Oracle: the trace of the explicit NxN matrix product, never the closed
// form. First factor: diagonal modulation by the offset tone. Second factor:
// outer product of the k tone with the conjugated i tone.
cd matrix_trace_oracle(int k, int i, double m, int n) {
    std::vector<std::vector<cd>> mod(static_cast<size_t>(n),
                                     std::vector<cd>(static_cast<size_t>(n)));
    std::vector<std::vector<cd>> pair(static_cast<size_t>(n),
                                      std::vector<cd>(static_cast<size_t>(n)));
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            mod[static_cast<size_t>(a)][static_cast<size_t>(b)] =
                (a == b) ? std::polar(1.0, -kTwoPi * m * a / n) : cd{0.0, 0.0};
            pair[static_cast<size_t>(a)][static_cast<size_t>(b)] =
                std::polar(1.0, kTwoPi * k * a / n) *
                std::polar(1.0, -kTwoPi * i * b / n);
        }
    }
    cd trace{0.0, 0.0};
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            trace += mod[static_cast<size_t>(a)][static_cast<size_t>(b)] *
                     pair[static_cast<size_t>(b)][static_cast<size_t>(a)];
        }
    }
    return trace;
}

struct AttackedSymbol {
    std::vector<SubcarrierSymbol> content;
    OfdmSymbol received;
};

AttackedSymbol make_attacked(int n, std::uint64_t content_seed, int target,
                             double offset, double amplitude, double phase) {
    AttackedSymbol out{make_qpsk(n, content_seed), OfdmSymbol{}};
    OfdmSymbol clean = loojam::synthesize(out.content, n);
    loojam::JammerConfig cfg;
    cfg.targets = {target};
    cfg.offset = offset;
    cfg.amplitude = amplitude;
    cfg.phase = phase;
    out.received = loojam::apply_frequency_shift(clean, out.content, cfg).attacked;
    return out;
}

}  // namespace

TEST_CASE("cross trace matches the explicit matrix-product oracle") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> pick_n(2, 64);
    std::uniform_real_distribution<double> pick_m(-8.0, 8.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = pick_n(rng);
        std::uniform_int_distribution<int> pick_k(0, n - 1);
        const int k = pick_k(rng);
        const int i = pick_k(rng);
        double m = pick_m(rng);
        if (trial % 7 == 0) m = std::round(m);  // exercise the exact regimes
        const cd got = loojam::cross_trace(k, i, m, n).value;
        const cd want = matrix_trace_oracle(k, i, m, n);
        CAPTURE(n);
        CAPTURE(k);
        CAPTURE(i);
        CAPTURE(m);
        REQUIRE(std::abs(got - want) < 1e-10);
    }
}

TEST_CASE("cross trace resonance and null cases") {
    // k - i - m = 0: resonance, trace = n.
    CHECK(std::abs(loojam::cross_trace(7, 5, 2.0, 8).value - cd{8.0, 0.0}) <
          1e-12);
    // Integer non-resonant difference: exactly zero.
    CHECK(std::abs(loojam::cross_trace(4, 5, 2.0, 8).value) < 1e-12);
    // Fractional offset: nonzero Dirichlet value.
    CHECK(std::abs(loojam::cross_trace(0, 5, 0.5, 8).value) > 1e-3);
    CHECK_THROWS_AS(loojam::cross_trace(8, 0, 0.0, 8), std::out_of_range);
    CHECK_THROWS_AS(loojam::cross_trace(0, -1, 0.0, 8), std::out_of_range);
}

TEST_CASE("analytic psi counts via brute-force waveform correlations") {
    // Oracle: synthesize the displaced tone and correlate against every other
    // subcarrier waveform directly.
    const int n = 8;
    const int i = 5;
    for (double m : {2.0, 0.5, 0.0}) {
        loojam::SubcarrierWaveform attacked{static_cast<double>(i) + m, 1.0, 0.0,
                                            n};
        int brute = 0;
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            loojam::SubcarrierWaveform other{static_cast<double>(k), 1.0, 0.0, n};
            if (std::abs(loojam::inner_product(attacked, other)) > 1e-6) ++brute;
        }
        CHECK(loojam::psi_analytic(i, m, n, 1e-6) == brute);
    }
    CHECK(loojam::psi_analytic(i, 0.5, n, 1e-6) == 7);
    CHECK(loojam::psi_analytic(i, 2.0, n, 1e-6) == 1);
    CHECK(loojam::psi_analytic(i, 0.0, n, 1e-6) == 0);
}

TEST_CASE("analytic psi regimes, exhaustive over small transforms") {
    for (int n : {4, 8, 16}) {
        for (int i = 0; i < n; ++i) {
            for (int twice_m = 0; twice_m < 2 * n; ++twice_m) {
                const double m = twice_m / 2.0;
                const bool integer = (twice_m % 2 == 0);
                const int psi = loojam::psi_analytic(i, m, n, 1e-6);
                CAPTURE(n);
                CAPTURE(i);
                CAPTURE(m);
                if (!integer) {
                    REQUIRE(psi == n - 1);
                    REQUIRE(loojam::classify_loo(psi, n) == LooVerdict::kLoO);
                } else if (std::fmod(m, n) == 0.0) {
                    REQUIRE(psi == 0);
                    REQUIRE(loojam::classify_loo(psi, n) == LooVerdict::kClean);
                } else {
                    REQUIRE(psi == 1);
                    REQUIRE(loojam::classify_loo(psi, n) ==
                            LooVerdict::kNoFullyLoO);
                }
            }
        }
    }
}

TEST_CASE("classification boundaries and preconditions") {
    CHECK(loojam::classify_loo(7, 8) == LooVerdict::kLoO);
    CHECK(loojam::classify_loo(0, 8) == LooVerdict::kClean);
    CHECK(loojam::classify_loo(1, 8) == LooVerdict::kNoFullyLoO);
    CHECK(loojam::classify_loo(6, 8) == LooVerdict::kNoFullyLoO);
    CHECK_THROWS_AS(loojam::classify_loo(8, 8), std::out_of_range);
    CHECK_THROWS_AS(loojam::classify_loo(-1, 8), std::out_of_range);
    CHECK_THROWS_AS(loojam::psi_analytic(0, 0.5, 8, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(loojam::psi_analytic(8, 0.5, 8, 1e-6), std::out_of_range);
}

TEST_CASE("offset estimation recovers a noiseless fractional shift") {
    auto sym = make_attacked(64, 11, 5, 0.5, 2.0, 0.7);
    DetectorConfig cfg;
    cfg.grid_step = 0.01;
    auto est = loojam::estimate_offset(sym.received, sym.content, 5, cfg);
    CHECK(est.found);
    CHECK(std::abs(est.m_hat - 0.5) <= 0.01);
    // The refined estimate is far better than the grid step.
    CHECK(std::abs(est.m_hat - 0.5) < 1e-6);
}

TEST_CASE("offset estimation on a clean signal reports nothing found") {
    auto content = make_qpsk(64, 3);
    OfdmSymbol clean = loojam::synthesize(content, 64);
    DetectorConfig cfg;
    for (int i : {0, 5, 63}) {
        auto est = loojam::estimate_offset(clean, content, i, cfg);
        CHECK_FALSE(est.found);
        CHECK(est.m_hat == 0.0);
    }
}

TEST_CASE("offset estimation validates its inputs") {
    auto content = make_qpsk(16, 1);
    OfdmSymbol clean = loojam::synthesize(content, 16);
    DetectorConfig cfg;
    cfg.grid_step = 0.0;
    CHECK_THROWS_AS(loojam::estimate_offset(clean, content, 5, cfg),
                    std::invalid_argument);
    cfg = DetectorConfig{};
    cfg.grid_range = 4.0;  // must cover at least n/2 = 8
    CHECK_THROWS_AS(loojam::estimate_offset(clean, content, 5, cfg),
                    std::invalid_argument);
    cfg = DetectorConfig{};
    CHECK_THROWS_AS(loojam::estimate_offset(clean, content, 16, cfg),
                    std::out_of_range);
    auto dup = content;
    dup.push_back(SubcarrierSymbol(3, 1.0, 0.0));
    CHECK_THROWS_AS(loojam::estimate_offset(clean, dup, 5, cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS(loojam::estimate_offset(clean, {}, 5, cfg),
                    std::invalid_argument);
}

TEST_CASE("noiseless empirical counts equal the analytic counts") {
    const int n = 64;
    auto sym = make_attacked(n, 11, 5, 0.5, 2.0, 0.7);
    DetectorConfig cfg;
    auto [pv, m_hat] = loojam::psi_empirical(sym.received, sym.content, cfg);
    REQUIRE(pv.psi.size() == static_cast<size_t>(n));
    CHECK(pv.pair_budget == 64LL * 63 / 2);
    CHECK(pv.psi[5] == loojam::psi_analytic(5, 0.5, n, cfg.epsilon));
    CHECK(pv.psi[5] == n - 1);
    CHECK(std::abs(m_hat[5] - 0.5) < 1e-9);
    for (int i = 0; i < n; ++i) {
        if (i != 5) CHECK(pv.psi[static_cast<size_t>(i)] == 0);
    }
}

TEST_CASE("noiseless integer shift yields a single non-orthogonal pair") {
    const int n = 64;
    auto sym = make_attacked(n, 11, 5, 3.0, 2.0, 0.7);
    DetectorConfig cfg;
    auto [pv, m_hat] = loojam::psi_empirical(sym.received, sym.content, cfg);
    CHECK(pv.psi[5] == 1);
    CHECK(std::abs(m_hat[5] - 3.0) < 1e-9);
    for (int i = 0; i < n; ++i) {
        if (i != 5) CHECK(pv.psi[static_cast<size_t>(i)] == 0);
    }
}

TEST_CASE("clean noiseless symbol yields all-zero empirical counts") {
    const int n = 64;
    auto content = make_qpsk(n, 21);
    OfdmSymbol clean = loojam::synthesize(content, n);
    DetectorConfig cfg;
    auto [pv, m_hat] = loojam::psi_empirical(clean, content, cfg);
    for (int i = 0; i < n; ++i) {
        CHECK(pv.psi[static_cast<size_t>(i)] == 0);
        CHECK(m_hat[static_cast<size_t>(i)] == 0.0);
    }
}

TEST_CASE("windowed scan agrees with the full scan") {
    const int n = 64;
    for (double m : {0.5, 3.0, -1.3}) {
        auto sym = make_attacked(n, 17, 23, m, 1.0, 1.9);
        DetectorConfig full;
        DetectorConfig windowed;
        windowed.scan = loojam::ScanPolicy::kWindowed;
        auto a = loojam::psi_empirical(sym.received, sym.content, full);
        auto b = loojam::psi_empirical(sym.received, sym.content, windowed);
        CHECK(a.first.psi == b.first.psi);
        CHECK(std::abs(a.second[23] - b.second[23]) < 1e-12);
    }
}

TEST_CASE("verdicts are invariant to the jammer amplitude scale") {
    const int n = 64;
    for (double m : {0.5, 3.0}) {
        std::vector<LooVerdict> baseline;
        int baseline_index = -2;
        for (double amplitude : {1e-3, 1.0, 1e3}) {
            auto sym = make_attacked(n, 11, 5, m, amplitude, 0.7);
            auto report =
                loojam::detect_symbol(sym.received, sym.content, DetectorConfig{});
            std::vector<LooVerdict> verdicts;
            for (const auto& r : report.per_subcarrier)
                verdicts.push_back(r.verdict);
            if (baseline_index == -2) {
                baseline = verdicts;
                baseline_index = report.attacked_index;
            } else {
                CHECK(verdicts == baseline);
                CHECK(report.attacked_index == baseline_index);
            }
        }
        CHECK(baseline_index == 5);
    }
}

TEST_CASE("symbol detection attributes cause") {
    const int n = 64;
    auto sym = make_attacked(n, 11, 5, 0.5, 1.0, 0.7);
    auto attacked_report =
        loojam::detect_symbol(sym.received, sym.content, DetectorConfig{});
    CHECK(attacked_report.cause == loojam::Cause::kJammingSuspected);
    CHECK(attacked_report.attacked_index == 5);
    CHECK(attacked_report.per_subcarrier[5].verdict == LooVerdict::kLoO);
    CHECK(attacked_report.per_subcarrier[5].s == doctest::Approx(1.0));

    auto content = make_qpsk(n, 11);
    OfdmSymbol clean = loojam::synthesize(content, n);
    auto clean_report = loojam::detect_symbol(clean, content, DetectorConfig{});
    CHECK(clean_report.cause == loojam::Cause::kClean);
    CHECK(clean_report.attacked_index == -1);
}

TEST_CASE("cause disambiguation from verdict patterns") {
    const int n = 16;
    std::vector<LooVerdict> all_loo(n, LooVerdict::kLoO);
    std::vector<LooVerdict> one_loo(n, LooVerdict::kClean);
    one_loo[5] = LooVerdict::kLoO;
    std::vector<LooVerdict> none(n, LooVerdict::kClean);

    auto fraction_fn = [](int candidate) {
        return candidate == 128 ? 0.97 : 0.1;
    };
    int best = 0;
    CHECK(loojam::disambiguate_cause(all_loo, {32, 128}, fraction_fn, 0.9,
                                     &best) == loojam::Cause::kWrongNSuspected);
    CHECK(best == 128);
    // No candidate explains the capture: stays a jamming suspicion.
    auto bad_fn = [](int) { return 0.2; };
    CHECK(loojam::disambiguate_cause(all_loo, {32, 128}, bad_fn, 0.9) ==
          loojam::Cause::kJammingSuspected);
    CHECK(loojam::disambiguate_cause(one_loo, {32, 128}, fraction_fn, 0.9) ==
          loojam::Cause::kJammingSuspected);
    CHECK(loojam::disambiguate_cause(none, {32, 128}, fraction_fn, 0.9) ==
          loojam::Cause::kClean);
    CHECK_THROWS_AS(loojam::disambiguate_cause(all_loo, {}, fraction_fn, 0.9),
                    std::invalid_argument);
    CHECK_THROWS_AS(loojam::disambiguate_cause(all_loo, {32}, {}, 0.9),
                    std::invalid_argument);
}

TEST_CASE("transform-length mismatch is recognized and resolved") {
    // The capture really uses 128 subcarriers; the receiver assumes 64.
    const int true_n = 128;
    auto true_content = make_qpsk(true_n, 77);
    OfdmSymbol capture = loojam::synthesize(true_content, true_n);

    const int assumed_n = 64;
    auto assumed_content = make_qpsk(assumed_n, 5);  // receiver's own reference
    std::vector<cd> head(capture.samples.begin(),
                         capture.samples.begin() + assumed_n);
    OfdmSymbol received = OfdmSymbol::from_samples(head, capture.scs_hz);

    auto clean_fraction = [&](int candidate) {
        if (static_cast<size_t>(candidate) > capture.samples.size()) return 0.0;
        std::vector<cd> window(capture.samples.begin(),
                               capture.samples.begin() + candidate);
        OfdmSymbol view = OfdmSymbol::from_samples(window, capture.scs_hz);
        auto reference = (candidate == true_n) ? true_content
                                               : make_qpsk(candidate, 5);
        std::vector<cd> bins = loojam::analyze_bins(view);
        double residual = 0.0;
        double ref_power = 0.0;
        for (int k = 0; k < candidate; ++k) {
            const cd want = reference[static_cast<size_t>(k)].value();
            residual += std::norm(bins[static_cast<size_t>(k)] - want);
            ref_power += std::norm(want);
        }
        return std::max(0.0, 1.0 - residual / ref_power);
    };

    DetectorConfig cfg;
    auto report = loojam::detect_symbol(received, assumed_content, cfg,
                                        {32, 128}, clean_fraction);
    CHECK(report.cause == loojam::Cause::kWrongNSuspected);
    CHECK(report.best_n == 128);

    // Same capture, right length: clean.
    auto ok = loojam::detect_symbol(capture, true_content, cfg, {32, 64},
                                    clean_fraction);
    CHECK(ok.cause == loojam::Cause::kClean);
}

TEST_CASE("offset estimation accuracy under noise, measured") {
    // 500 seeded trials per SNR.  A single noisy symbol gives the estimator
    // one Dirichlet peak to find among noise maxima spread over the whole
    // search range, so two figures matter: how often the estimate locks onto
    // the true tone (within half a subcarrier) and how tight it is once
    // locked.  The bounds below freeze measured values; the raw medians are
    // printed for the record.
    const int n = 64;
    const int target = 5;
    struct Fixture {
        double snr_db;
        double min_lock_fraction;  // locked trials / found trials
        double max_locked_median;  // median |m_hat - m| given a lock
    };
    // Measured: 5 dB locks ~1/3 of found trials (noise maxima across the
    // full range win the rest) with ~0.12 median once locked; 10 dB locks
    // ~90% with ~0.08.  A single-symbol estimate cannot do much better at
    // this noise level no matter the grid.
    for (Fixture fx : {Fixture{5.0, 0.20, 0.25}, Fixture{10.0, 0.80, 0.20}}) {
        CAPTURE(fx.snr_db);
        std::vector<double> errors;
        std::vector<double> locked;
        for (std::uint64_t trial = 0; trial < 500; ++trial) {
            auto sym = make_attacked(n, 1000 + trial, target, 0.5, 1.0,
                                     0.1 + 0.01 * static_cast<double>(trial % 60));
            OfdmSymbol noisy =
                loojam::add_awgn(sym.received, fx.snr_db, 9000 + trial);
            auto est = loojam::estimate_offset(noisy, sym.content, target,
                                               DetectorConfig{});
            if (!est.found) continue;
            const double err = std::abs(est.m_hat - 0.5);
            errors.push_back(err);
            if (err <= 0.5) locked.push_back(err);
        }
        REQUIRE(errors.size() > 250);  // found in well over half the trials
        std::sort(errors.begin(), errors.end());
        std::sort(locked.begin(), locked.end());
        const double lock_fraction =
            static_cast<double>(locked.size()) / static_cast<double>(errors.size());
        REQUIRE(!locked.empty());
        const double locked_median = locked[locked.size() / 2];
        MESSAGE("snr ", fx.snr_db, " dB: ", errors.size(),
                " found-trials, lock fraction ", lock_fraction,
                ", median error locked ", locked_median, ", overall ",
                errors[errors.size() / 2]);
        CHECK(lock_fraction >= fx.min_lock_fraction);
        CHECK(locked_median <= fx.max_locked_median);
    }
}

TEST_CASE("report serialization carries counts, offsets and cause") {
    const int n = 8;
    auto sym = make_attacked(n, 2, 3, 0.5, 1.0, 0.9);
    auto report =
        loojam::detect_symbol(sym.received, sym.content, DetectorConfig{});
    std::ostringstream out;
    loojam::write_report_csv(report, out);
    const std::string text = out.str();
    CHECK(text.rfind("subcarrier,psi,s,m_hat,verdict\n", 0) == 0);
    CHECK(text.find("cause,jamming_suspected\n") != std::string::npos);

    // The attacked row: parse its fields rather than matching bytes, since
    // the reported offset carries the refinement's floating-point dust.
    const auto row_start = text.find("\n3,");
    REQUIRE(row_start != std::string::npos);
    std::istringstream row(text.substr(row_start + 1));
    std::string field;
    std::getline(row, field, ',');
    CHECK(field == "3");
    std::getline(row, field, ',');
    CHECK(field == "7");  // psi = n - 1
    std::getline(row, field, ',');
    CHECK(std::stod(field) == doctest::Approx(1.0));  // s = psi / (n - 1)
    std::getline(row, field, ',');
    CHECK(std::stod(field) == doctest::Approx(0.5).epsilon(1e-9));
    std::getline(row, field);
    CHECK(field == "loo");
}
