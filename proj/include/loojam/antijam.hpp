#pragma once

#include <optional>
#include <vector>

#include "loojam/detector.hpp"
#include "loojam/ofdm.hpp"

namespace loojam {

// How the corrective offset m' is chosen.
//  kResonanceAvoidance  first candidate m' for which no subcarrier index k
//                       makes m' + k + i_tilde a multiple of N. Picks a
//                       non-resonant shift but does not by itself restore
//                       orthogonality.
//  kOffsetNegation      m' = -m_hat, undoing the estimated displacement.
//                       Restores orthogonality exactly when m_hat is exact.
enum class CorrectionPolicy { kResonanceAvoidance, kOffsetNegation };

// Constraint checked by the avoidance rule. The two forms coincide whenever
// k ranges over all residues mod N: each reduces to "m' + i_tilde is not an
// integer", since k then realizes every integer remainder.
//  kSumForm         m' + k + i_tilde not in N*Z for all k in [0, N)
//  kDifferenceForm  k - i_tilde - m' not in N*Z for all k in [0, N)
enum class AvoidanceConstraint { kSumForm, kDifferenceForm };

// Multiplicative corrective signal c[t] = A * e^{j (2 pi m' t / N + phase)}.
struct CorrectionSignal {
    double m_prime = 0.0;
    double amplitude = 1.0;  // > 0
    double phase = 0.0;
    CorrectionPolicy policy = CorrectionPolicy::kOffsetNegation;
};

// Candidate grid for the avoidance rule, ordered by ascending |m'|:
// 0, +step, -step, +2*step, -2*step, ... out to +-max_abs.
std::vector<double> avoidance_candidates(double step, double max_abs);

// First candidate that resonates with no subcarrier: for every k in [0, N)
// the constraint quantity divided by N is not an integer. Candidates that
// fail advance to the next; nullopt when the sequence is exhausted.
std::optional<double> select_m_prime_avoidance(
    double i_tilde, int n, const std::vector<double>& candidates,
    AvoidanceConstraint constraint = AvoidanceConstraint::kSumForm);

// Negation of the estimated offset: m' = -m_hat, unit amplitude, zero phase.
CorrectionSignal select_m_prime_negation(double m_hat);

// out[t] = in[t] * A * e^{j (2 pi m' t / n + phase)}. Throws on length
// mismatch or non-positive amplitude. Invertible: applying (m', A, phase)
// then (-m', 1/A, -phase) restores the input.
OfdmSymbol apply_correction(const OfdmSymbol& contribution,
                            const CorrectionSignal& corr, int n);

// Corrects subcarrier i inside a full received symbol: subtracts the
// reference with i removed to isolate the subcarrier's contribution,
// multiplies that contribution by the corrective signal, and reassembles.
// With rescale, the shifted contribution is then scaled by the inverse of
// its measured complex gain on bin i, so a successful correction restores
// the reference amplitude and phase, not just the frequency; rescale is
// skipped when the reference bin is empty or the measured gain vanishes.
OfdmSymbol correct_symbol(const OfdmSymbol& received,
                          const std::vector<SubcarrierSymbol>& reference,
                          int i, const CorrectionSignal& corr,
                          bool rescale = true);

struct CorrectionOutcome {
    int psi_before = 0;             // empirical psi of subcarrier i, uncorrected
    int psi_after = 0;              // same, after correction
    double residual_leakage = 0.0;  // peak |residual bin| away from bin i, after
};

// Reruns the detector's empirical count on both symbols and measures what
// the correction left behind on the other bins.
CorrectionOutcome verify_restoration(const OfdmSymbol& before,
                                     const OfdmSymbol& after,
                                     const std::vector<SubcarrierSymbol>& reference,
                                     int i, const DetectorConfig& cfg);

}  // namespace loojam
