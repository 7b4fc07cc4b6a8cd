#include "loojam/detector.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include "loojam/fft.hpp"

namespace loojam {

namespace {

void check_index(int value, int n, const char* what) {
    if (value < 0 || value >= n) {
        throw std::out_of_range(std::string(what) + " out of range [0, " +
                                std::to_string(n) + ")");
    }
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Dense reference bins; rejects duplicate or out-of-range entries.
std::vector<cd> dense_reference(const std::vector<SubcarrierSymbol>& reference,
                                int n) {
    if (reference.empty()) {
        throw std::invalid_argument("detector: reference content is empty");
    }
    std::vector<cd> bins(static_cast<size_t>(n), cd{0.0, 0.0});
    std::vector<bool> seen(static_cast<size_t>(n), false);
    for (const SubcarrierSymbol& s : reference) {
        check_index(s.index, n, "reference subcarrier index");
        if (seen[static_cast<size_t>(s.index)]) {
            throw std::invalid_argument("detector: duplicate reference index " +
                                        std::to_string(s.index));
        }
        seen[static_cast<size_t>(s.index)] = true;
        bins[static_cast<size_t>(s.index)] = s.value();
    }
    return bins;
}

int oversampling_for(double grid_step) {
    if (!(grid_step > 0.0)) {
        throw std::invalid_argument("detector: offset grid step must be positive");
    }
    // The fine grid is an integer oversampling of the subcarrier spacing;
    // steps below 1/512 of a subcarrier are clamped.
    return std::min(512, std::max(2, static_cast<int>(std::llround(1.0 / grid_step))));
}

// K(mu) = <delta_i, dirichlet template at i+mu> — independent of i, periodic
// in mu with period n. Tabulated once per (n, oversampling). Not thread safe
// (same caveat as the transform plan cache).
const std::vector<cd>& kernel_table(int n, int ovs) {
    static std::map<std::pair<int, int>, std::unique_ptr<std::vector<cd>>> cache;
    const auto key = std::make_pair(n, ovs);
    auto it = cache.find(key);
    if (it == cache.end()) {
        auto table = std::make_unique<std::vector<cd>>(
            static_cast<size_t>(n) * static_cast<size_t>(ovs));
        for (size_t q = 0; q < table->size(); ++q) {
            (*table)[q] = geometric_sum(static_cast<double>(q) / ovs, n) /
                          static_cast<double>(n);
        }
        it = cache.emplace(key, std::move(table)).first;
    }
    return *it->second;
}

struct ResidualAnalysis {
    int n = 0;
    int ovs = 1;
    int m_fine = 0;                 // n * ovs
    std::vector<cd> ref_bins;       // known content, dense
    std::vector<cd> residual_bins;  // received spectrum minus reference
    std::vector<cd> fine;           // residual spectrum on the fine offset grid
    double ref_mean_power = 0.0;
    double residual_mean_power = 0.0;
    double sigma2 = 0.0;  // per-bin noise power estimate (median-based)
    double gate = 0.0;    // detection gate on the per-subcarrier score
    int peak_q = 0;       // strongest fine-grid residual bin
};

ResidualAnalysis build_residual_analysis(
    const OfdmSymbol& received, const std::vector<SubcarrierSymbol>& reference,
    const DetectorConfig& cfg) {
    ResidualAnalysis ra;
    ra.n = received.n_fft;
    if (cfg.grid_range > 0.0 && cfg.grid_range < ra.n / 2.0) {
        throw std::invalid_argument(
            "detector: offset grid must cover at least half the transform "
            "length on each side");
    }
    ra.ovs = oversampling_for(cfg.grid_step);
    ra.m_fine = ra.n * ra.ovs;
    ra.ref_bins = dense_reference(reference, ra.n);

    double ref_energy = 0.0;
    for (const cd& x : ra.ref_bins) ref_energy += std::norm(x);
    ra.ref_mean_power = ref_energy / ra.n;

    // Time-domain residual: received minus the synthesized reference.
    std::vector<cd> ref_time = fft_inverse(ra.ref_bins);
    std::vector<cd> padded(static_cast<size_t>(ra.m_fine), cd{0.0, 0.0});
    for (int t = 0; t < ra.n; ++t) {
        padded[static_cast<size_t>(t)] =
            received.samples[static_cast<size_t>(t)] -
            ref_time[static_cast<size_t>(t)] / static_cast<double>(ra.n);
    }
    ra.fine = fft_forward(padded);

    ra.residual_bins.resize(static_cast<size_t>(ra.n));
    double residual_energy = 0.0;
    for (int k = 0; k < ra.n; ++k) {
        ra.residual_bins[static_cast<size_t>(k)] =
            ra.fine[static_cast<size_t>(k) * static_cast<size_t>(ra.ovs)];
        residual_energy += std::norm(ra.residual_bins[static_cast<size_t>(k)]);
    }
    ra.residual_mean_power = residual_energy / ra.n;

    // Median |residual bin|^2 estimates the noise floor robustly against a
    // handful of strong attack bins; the median of an exponential power
    // variable sits at ln(2) times its mean.
    std::vector<double> powers(static_cast<size_t>(ra.n));
    for (int k = 0; k < ra.n; ++k) {
        powers[static_cast<size_t>(k)] =
            std::norm(ra.residual_bins[static_cast<size_t>(k)]);
    }
    auto mid = powers.begin() + powers.size() / 2;
    std::nth_element(powers.begin(), mid, powers.end());
    ra.sigma2 = *mid / std::log(2.0);

    // Gate: the score under pure noise concentrates near sigma2 * ln(n)
    // (max over ~n independent hypotheses), with a configured margin; the
    // floor terms keep noiseless clean inputs from ever passing.
    const double noise_gate =
        (std::log(static_cast<double>(std::max(ra.n, 3))) + cfg.gate_margin) *
        ra.sigma2;
    ra.gate = std::max({cfg.gate_floor * ra.ref_mean_power, noise_gate,
                        cfg.min_evidence});

    double best = -1.0;
    for (int q = 0; q < ra.m_fine; ++q) {
        const double p = std::norm(ra.fine[static_cast<size_t>(q)]);
        if (p > best) {
            best = p;
            ra.peak_q = q;
        }
    }
    return ra;
}

struct SubcarrierScan {
    double lambda = 0.0;
    double m_hat = 0.0;
    bool gated = false;
};

// |evidence|^2 for subcarrier i at offset index q: the residual spectrum at
// i + q/ovs plus the own-bin term that removes the hypothesized depletion.
double evidence_sq(const ResidualAnalysis& ra, const std::vector<cd>& kt, int i,
                   int q) {
    const int idx = (i * ra.ovs + q) % ra.m_fine;
    const cd e = ra.fine[static_cast<size_t>(idx)] +
                 ra.ref_bins[static_cast<size_t>(i)] * kt[static_cast<size_t>(q)];
    return std::norm(e);
}

double wrap_signed(double mu, int n) {
    mu = std::fmod(mu, static_cast<double>(n));
    if (mu > n / 2.0) mu -= n;
    if (mu <= -n / 2.0) mu += n;
    return mu;
}

SubcarrierScan scan_subcarrier(const ResidualAnalysis& ra,
                               const std::vector<cd>& kt, int i,
                               const DetectorConfig& cfg) {
    int best_q = 0;
    double best_sq = -1.0;
    auto consider = [&](int q) {
        const double p = evidence_sq(ra, kt, i, q);
        if (p > best_sq) {
            best_sq = p;
            best_q = q;
        }
    };

    if (cfg.scan == ScanPolicy::kFull) {
        for (int q = 0; q < ra.m_fine; ++q) consider(q);
    } else {
        // The score is negligible except near offset zero (own-bin term) and
        // near the strongest residual peak, so scan only those windows.
        const double half = std::clamp(cfg.window_halfwidth, 0.5, ra.n / 2.0);
        const int w = static_cast<int>(std::lround(half * ra.ovs));
        auto run_window = [&](int center) {
            for (int dq = -w; dq <= w; ++dq) {
                consider(((center + dq) % ra.m_fine + ra.m_fine) % ra.m_fine);
            }
        };
        run_window(0);
        run_window(((ra.peak_q - i * ra.ovs) % ra.m_fine + ra.m_fine) % ra.m_fine);
    }

    // Score: best template match, minus the energy the depletion hypothesis
    // fails to explain at the subcarrier's own bin. Equal to the residual
    // energy accounted for by "subcarrier i was displaced" — maximal for the
    // truly attacked subcarrier, at any jammer amplitude.
    const cd xi = ra.ref_bins[static_cast<size_t>(i)];
    const cd ri = ra.residual_bins[static_cast<size_t>(i)];
    const double depletion = -std::norm(xi) - 2.0 * (ri * std::conj(xi)).real();

    SubcarrierScan out;
    out.lambda = best_sq + depletion;
    out.gated = out.lambda > ra.gate;

    // Parabolic refinement of the peak between fine-grid points.
    const int qm = (best_q - 1 + ra.m_fine) % ra.m_fine;
    const int qp = (best_q + 1) % ra.m_fine;
    const double y0 = best_sq;
    const double ym = evidence_sq(ra, kt, i, qm);
    const double yp = evidence_sq(ra, kt, i, qp);
    const double denom = ym + yp - 2.0 * y0;
    double delta = 0.0;
    if (denom < 0.0) {
        delta = std::clamp(0.5 * (ym - yp) / denom, -0.6, 0.6);
    }
    out.m_hat = wrap_signed((best_q + delta) / ra.ovs, ra.n);
    return out;
}

// Snap offsets that are integer up to refinement noise, so the analytic
// count sees the exact integer regime.
double snap_offset(double m_hat) {
    const double r = std::round(m_hat);
    return (std::abs(m_hat - r) < 1e-9) ? r : m_hat;
}

struct SymbolScan {
    ResidualAnalysis ra;
    std::vector<SubcarrierScan> per;
    int winner = -1;  // best gated subcarrier
};

SymbolScan run_scan(const OfdmSymbol& received,
                    const std::vector<SubcarrierSymbol>& reference,
                    const DetectorConfig& cfg) {
    SymbolScan s;
    s.ra = build_residual_analysis(received, reference, cfg);
    const std::vector<cd>& kt = kernel_table(s.ra.n, s.ra.ovs);
    s.per.resize(static_cast<size_t>(s.ra.n));
    double best = 0.0;
    for (int i = 0; i < s.ra.n; ++i) {
        s.per[static_cast<size_t>(i)] = scan_subcarrier(s.ra, kt, i, cfg);
        const SubcarrierScan& sc = s.per[static_cast<size_t>(i)];
        if (sc.gated && (s.winner < 0 || sc.lambda > best)) {
            best = sc.lambda;
            s.winner = i;
        }
    }
    return s;
}

// Applies the attribution policy: which subcarriers get a nonzero count.
std::pair<std::vector<int>, std::vector<double>> assign_counts(
    const SymbolScan& scan, const DetectorConfig& cfg) {
    const int n = scan.ra.n;
    std::vector<int> psi(static_cast<size_t>(n), 0);
    std::vector<double> m_hat(static_cast<size_t>(n), 0.0);
    auto credit = [&](int i) {
        const SubcarrierScan& sc = scan.per[static_cast<size_t>(i)];
        const double m = snap_offset(sc.m_hat);
        m_hat[static_cast<size_t>(i)] = sc.m_hat;
        psi[static_cast<size_t>(i)] = psi_analytic(i, m, n, cfg.epsilon);
    };
    if (cfg.attribution == Attribution::kCompetitive) {
        if (scan.winner >= 0) credit(scan.winner);
    } else {
        for (int i = 0; i < n; ++i) {
            if (scan.per[static_cast<size_t>(i)].gated) credit(i);
        }
    }
    return {std::move(psi), std::move(m_hat)};
}

}  // namespace

TraceStatistic cross_trace(int k, int i, double m, int n) {
    if (n < 2) {
        throw std::invalid_argument("cross_trace: need at least two subcarriers");
    }
    check_index(k, n, "subcarrier k");
    check_index(i, n, "subcarrier i");
    TraceStatistic t;
    t.k = k;
    t.i = i;
    t.m_hypothesis = m;
    t.value = geometric_sum(m - static_cast<double>(k - i), n);
    return t;
}

int psi_analytic(int i, double m, int n, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("psi_analytic: epsilon must be positive");
    }
    if (n < 2) {
        throw std::invalid_argument("psi_analytic: need at least two subcarriers");
    }
    check_index(i, n, "subcarrier i");
    const double threshold = epsilon * n;
    int count = 0;
    for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        if (std::abs(cross_trace(k, i, m, n).value) > threshold) ++count;
    }
    return count;
}

LooVerdict classify_loo(int psi, int n) {
    if (n < 2) {
        throw std::invalid_argument("classify_loo: need at least two subcarriers");
    }
    if (psi < 0 || psi > n - 1) {
        throw std::out_of_range("classify_loo: count outside [0, n-1]");
    }
    if (psi == n - 1) return LooVerdict::kLoO;
    if (psi == 0) return LooVerdict::kClean;
    return LooVerdict::kNoFullyLoO;
}

const char* verdict_name(LooVerdict v) {
    switch (v) {
        case LooVerdict::kLoO: return "loo";
        case LooVerdict::kNoFullyLoO: return "no_fully_loo";
        case LooVerdict::kClean: return "clean";
    }
    return "unknown";
}

const char* cause_name(Cause c) {
    switch (c) {
        case Cause::kClean: return "clean";
        case Cause::kJammingSuspected: return "jamming_suspected";
        case Cause::kWrongNSuspected: return "wrong_n_suspected";
    }
    return "unknown";
}

OffsetEstimate estimate_offset(const OfdmSymbol& received,
                               const std::vector<SubcarrierSymbol>& reference,
                               int i, const DetectorConfig& cfg) {
    check_index(i, received.n_fft, "subcarrier i");
    DetectorConfig full_cfg = cfg;
    full_cfg.scan = ScanPolicy::kFull;  // the contract scan covers the full range
    ResidualAnalysis ra = build_residual_analysis(received, reference, full_cfg);
    const std::vector<cd>& kt = kernel_table(ra.n, ra.ovs);
    SubcarrierScan sc = scan_subcarrier(ra, kt, i, full_cfg);
    OffsetEstimate est;
    est.score = sc.lambda;
    est.found = sc.gated;
    est.m_hat = sc.gated ? sc.m_hat : 0.0;
    return est;
}

std::pair<PsiVector, std::vector<double>> psi_empirical(
    const OfdmSymbol& received, const std::vector<SubcarrierSymbol>& reference,
    const DetectorConfig& cfg) {
    SymbolScan scan = run_scan(received, reference, cfg);
    auto [psi, m_hat] = assign_counts(scan, cfg);
    PsiVector pv;
    pv.psi = std::move(psi);
    pv.pair_budget =
        static_cast<long long>(scan.ra.n) * (scan.ra.n - 1) / 2;
    return {std::move(pv), std::move(m_hat)};
}

Cause disambiguate_cause(const std::vector<LooVerdict>& verdicts,
                         const std::vector<int>& alt_n_candidates,
                         const CleanFractionFn& clean_fraction_for_n,
                         double trigger_fraction, int* best_n) {
    if (verdicts.empty()) {
        throw std::invalid_argument("disambiguate_cause: no verdicts");
    }
    if (best_n != nullptr) *best_n = 0;
    long loo = 0;
    long non_clean = 0;
    for (LooVerdict v : verdicts) {
        if (v == LooVerdict::kLoO) ++loo;
        if (v != LooVerdict::kClean) ++non_clean;
    }
    const double loo_fraction =
        static_cast<double>(loo) / static_cast<double>(verdicts.size());
    if (loo_fraction >= trigger_fraction) {
        if (alt_n_candidates.empty() || !clean_fraction_for_n) {
            throw std::invalid_argument(
                "disambiguate_cause: transform-length re-check needed but no "
                "candidates available");
        }
        int best_candidate = 0;
        double best_fraction = -1.0;
        for (int candidate : alt_n_candidates) {
            const double f = clean_fraction_for_n(candidate);
            if (f > best_fraction) {
                best_fraction = f;
                best_candidate = candidate;
            }
        }
        if (best_fraction >= trigger_fraction) {
            if (best_n != nullptr) *best_n = best_candidate;
            return Cause::kWrongNSuspected;
        }
        return Cause::kJammingSuspected;
    }
    return non_clean > 0 ? Cause::kJammingSuspected : Cause::kClean;
}

DetectionReport detect_symbol(const OfdmSymbol& received,
                              const std::vector<SubcarrierSymbol>& reference,
                              const DetectorConfig& cfg,
                              const std::vector<int>& alt_n_candidates,
                              const CleanFractionFn& clean_fraction_for_n) {
    SymbolScan scan = run_scan(received, reference, cfg);
    auto [psi, m_hat] = assign_counts(scan, cfg);
    const int n = scan.ra.n;

    DetectionReport report;
    report.per_subcarrier.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        SubcarrierReport& r = report.per_subcarrier[static_cast<size_t>(i)];
        r.subcarrier = i;
        r.psi = psi[static_cast<size_t>(i)];
        r.s = static_cast<double>(r.psi) / (n - 1);
        r.m_hat = m_hat[static_cast<size_t>(i)];
        r.verdict = classify_loo(r.psi, n);
    }
    report.attacked_index = scan.winner;

    // A residual as strong as the reference on nearly every bin cannot come
    // from a single displaced subcarrier at moderate power — the more likely
    // cause is that the transform length itself is wrong. Only then is the
    // (expensive) candidate re-check consulted.
    const bool mismatch_suspected =
        scan.ra.ref_mean_power > 0.0 &&
        scan.ra.residual_mean_power >=
            cfg.wrong_n_trigger * scan.ra.ref_mean_power;
    if (mismatch_suspected && clean_fraction_for_n && !alt_n_candidates.empty()) {
        int best_candidate = 0;
        double best_fraction = -1.0;
        for (int candidate : alt_n_candidates) {
            const double f = clean_fraction_for_n(candidate);
            if (f > best_fraction) {
                best_fraction = f;
                best_candidate = candidate;
            }
        }
        if (best_fraction >= cfg.wrong_n_trigger) {
            report.cause = Cause::kWrongNSuspected;
            report.best_n = best_candidate;
            return report;
        }
    }
    bool any_non_clean = false;
    for (const SubcarrierReport& r : report.per_subcarrier) {
        if (r.verdict != LooVerdict::kClean) any_non_clean = true;
    }
    report.cause =
        any_non_clean ? Cause::kJammingSuspected : Cause::kClean;
    return report;
}

void write_report_csv(const DetectionReport& report, std::ostream& out) {
    out << "subcarrier,psi,s,m_hat,verdict\n";
    for (const SubcarrierReport& r : report.per_subcarrier) {
        out << r.subcarrier << ',' << r.psi << ',' << format_double(r.s) << ','
            << format_double(r.m_hat) << ',' << verdict_name(r.verdict) << '\n';
    }
    out << "cause," << cause_name(report.cause);
    if (report.cause == Cause::kWrongNSuspected) {
        out << ',' << report.best_n;
    }
    out << '\n';
}

}  // namespace loojam
