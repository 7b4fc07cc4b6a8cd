#include "loojam/antijam.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace loojam {
namespace {

constexpr double kIntegerTol = 1e-9;

bool is_integer(double x) {
    return std::abs(x - std::round(x)) < kIntegerTol;
}

// Reference bins as a dense length-n vector; throws on bad indices.
std::vector<cd> dense_bins(const std::vector<SubcarrierSymbol>& reference,
                           int n) {
    std::vector<cd> bins(static_cast<std::size_t>(n), cd{0.0, 0.0});
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const auto& s : reference) {
        if (s.index < 0 || s.index >= n)
            throw std::invalid_argument("reference subcarrier index out of range");
        if (seen[static_cast<std::size_t>(s.index)])
            throw std::invalid_argument("duplicate reference subcarrier");
        seen[static_cast<std::size_t>(s.index)] = true;
        bins[static_cast<std::size_t>(s.index)] = s.value();
    }
    return bins;
}

}  // namespace

std::vector<double> avoidance_candidates(double step, double max_abs) {
    if (!(step > 0.0)) throw std::invalid_argument("candidate step must be positive");
    if (max_abs < 0.0) throw std::invalid_argument("candidate range must be non-negative");
    std::vector<double> out{0.0};
    for (int j = 1; j * step <= max_abs + kIntegerTol; ++j) {
        out.push_back(j * step);
        out.push_back(-j * step);
    }
    return out;
}

std::optional<double> select_m_prime_avoidance(
    double i_tilde, int n, const std::vector<double>& candidates,
    AvoidanceConstraint constraint) {
    if (n <= 0) throw std::invalid_argument("fft length must be positive");
    if (candidates.empty()) throw std::invalid_argument("empty candidate sequence");
    for (double m_prime : candidates) {
        bool resonates = false;
        for (int k = 0; k < n && !resonates; ++k) {
            const double q = constraint == AvoidanceConstraint::kSumForm
                                 ? (m_prime + k + i_tilde) / n
                                 : (k - i_tilde - m_prime) / n;
            resonates = is_integer(q);
        }
        if (!resonates) return m_prime;
    }
    return std::nullopt;
}

CorrectionSignal select_m_prime_negation(double m_hat) {
    if (!std::isfinite(m_hat))
        throw std::invalid_argument("offset estimate must be finite");
    CorrectionSignal corr;
    corr.m_prime = -m_hat;
    corr.amplitude = 1.0;
    corr.phase = 0.0;
    corr.policy = CorrectionPolicy::kOffsetNegation;
    return corr;
}

OfdmSymbol apply_correction(const OfdmSymbol& contribution,
                            const CorrectionSignal& corr, int n) {
    if (!(corr.amplitude > 0.0))
        throw std::invalid_argument("correction amplitude must be positive");
    if (n <= 0) throw std::invalid_argument("fft length must be positive");
    if (contribution.n_fft != n ||
        contribution.samples.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("waveform length mismatch");
    std::vector<cd> out(contribution.samples.size());
    const double w = 2.0 * std::numbers::pi * corr.m_prime / n;
    for (int t = 0; t < n; ++t)
        out[static_cast<std::size_t>(t)] =
            contribution.samples[static_cast<std::size_t>(t)] *
            std::polar(corr.amplitude, w * t + corr.phase);
    return OfdmSymbol::from_samples(std::move(out), contribution.scs_hz);
}

OfdmSymbol correct_symbol(const OfdmSymbol& received,
                          const std::vector<SubcarrierSymbol>& reference,
                          int i, const CorrectionSignal& corr, bool rescale) {
    const int n = received.n_fft;
    if (i < 0 || i >= n) throw std::invalid_argument("subcarrier index out of range");
    std::vector<cd> bins = dense_bins(reference, n);
    const cd xi = bins[static_cast<std::size_t>(i)];

    // Everything the other subcarriers contribute, by the reference.
    bins[static_cast<std::size_t>(i)] = cd{0.0, 0.0};
    OfdmSymbol rest = synthesize_bins(bins, received.scs_hz);

    std::vector<cd> contribution(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t)
        contribution[static_cast<std::size_t>(t)] =
            received.samples[static_cast<std::size_t>(t)] -
            rest.samples[static_cast<std::size_t>(t)];
    OfdmSymbol shifted = apply_correction(
        OfdmSymbol::from_samples(std::move(contribution), received.scs_hz),
        corr, n);

    if (rescale && std::abs(xi) > 0.0) {
        // Complex gain the corrected contribution actually carries on bin i.
        const cd alpha = analyze_bins(shifted)[static_cast<std::size_t>(i)] / xi;
        if (std::abs(alpha) > 1e-12)
            for (auto& s : shifted.samples) s /= alpha;
    }

    std::vector<cd> out(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t)
        out[static_cast<std::size_t>(t)] =
            rest.samples[static_cast<std::size_t>(t)] +
            shifted.samples[static_cast<std::size_t>(t)];
    return OfdmSymbol::from_samples(std::move(out), received.scs_hz);
}

CorrectionOutcome verify_restoration(const OfdmSymbol& before,
                                     const OfdmSymbol& after,
                                     const std::vector<SubcarrierSymbol>& reference,
                                     int i, const DetectorConfig& cfg) {
    const int n = before.n_fft;
    if (after.n_fft != n) throw std::invalid_argument("fft length mismatch");
    if (i < 0 || i >= n) throw std::invalid_argument("subcarrier index out of range");

    CorrectionOutcome outcome;
    outcome.psi_before =
        psi_empirical(before, reference, cfg).first.psi[static_cast<std::size_t>(i)];
    outcome.psi_after =
        psi_empirical(after, reference, cfg).first.psi[static_cast<std::size_t>(i)];

    const std::vector<cd> bins = dense_bins(reference, n);
    const std::vector<cd> got = analyze_bins(after);
    double peak = 0.0;
    for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        peak = std::max(peak, std::abs(got[static_cast<std::size_t>(k)] -
                                       bins[static_cast<std::size_t>(k)]));
    }
    outcome.residual_leakage = peak;
    return outcome;
}

}  // namespace loojam
