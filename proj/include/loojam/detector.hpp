#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "loojam/ofdm.hpp"

namespace loojam {

// --- Analytic subcarrier-pair trace test -----------------------------------
//
// A frequency offset m applied to subcarrier i turns its correlation against
// subcarrier k into the trace of the product of the offset waveform's sample
// matrix with the (k,i) pair matrix. That trace collapses to the geometric
// sum over exponent -(k - i - m), so it never needs the NxN product:
// it is N when k - i - m is a multiple of N, zero for other integer
// differences, and a Dirichlet-kernel value for fractional offsets.

struct TraceStatistic {
    int k = 0;
    int i = 0;
    double m_hypothesis = 0.0;
    cd value{0.0, 0.0};
};

// Trace of the cross product between the offset tone on subcarrier i and the
// pair basis matrix for (k, i). Equals geometric_sum(-(k - i - m), n).
TraceStatistic cross_trace(int k, int i, double m, int n);

// psi(i): number of subcarriers k != i whose cross trace magnitude exceeds
// epsilon * n (relative to the resonance value n). In [0, n-1].
int psi_analytic(int i, double m, int n, double epsilon);

enum class LooVerdict { kLoO, kNoFullyLoO, kClean };

// LoO   <=> psi = n-1 (orthogonality lost against every other subcarrier)
// Clean <=> psi = 0
// NoFullyLoO otherwise.
LooVerdict classify_loo(int psi, int n);

const char* verdict_name(LooVerdict v);

struct PsiVector {
    std::vector<int> psi;        // per subcarrier, in [0, n-1]
    long long pair_budget = 0;   // n(n-1)/2 distinct pairs behind the counts
};

// --- Empirical detection on received samples --------------------------------

// Where the per-subcarrier offset search looks for evidence.
//  kFull     scans every offset hypothesis on the fine grid (principal range).
//  kWindowed scans only around offset zero and around the strongest residual
//            peak; equivalent in practice because the test statistic is
//            negligible elsewhere, and much cheaper for large n.
enum class ScanPolicy { kFull, kWindowed };

// How per-subcarrier detections are attributed.
//  kCompetitive  the best-scoring subcarrier wins; all others report zero.
//                Right for single-attacker symbols: every hypothesis sees the
//                same global residual peak, so only the best explanation
//                should claim it.
//  kIndependent  every subcarrier whose score clears the gate reports its own
//                count. Used for the wrong-FFT-length check, where most
//                subcarriers legitimately look broken at once.
enum class Attribution { kCompetitive, kIndependent };

struct DetectorConfig {
    double epsilon = 1e-6;      // trace nonzero threshold, relative to n
    double tau = 0.5;           // decision threshold on s = psi/(n-1)
    double grid_step = 0.05;    // offset search step (subcarrier units)
    double grid_range = -1.0;   // half-range of the search; <= 0 means n/2
    double gate_margin = 2.5;   // additive term on the ln(n)-scaled noise gate
    double gate_floor = 0.05;   // gate as a fraction of mean reference power
    double min_evidence = 1e-7; // absolute score floor
    double window_halfwidth = 2.0;  // kWindowed: half-width in subcarriers
    double wrong_n_trigger = 0.9;   // fraction of gated subcarriers that
                                    // triggers the FFT-length re-check
    ScanPolicy scan = ScanPolicy::kFull;
    Attribution attribution = Attribution::kCompetitive;
};

struct OffsetEstimate {
    double m_hat = 0.0;  // estimated offset, principal range (-n/2, n/2]
    double score = 0.0;  // generalized-likelihood score at the estimate
    bool found = false;  // score cleared the detection gate
};

// Estimates the frequency offset of a displaced tone hypothesized on
// subcarrier i, by matching Dirichlet-kernel templates against the spectrum
// of (received - reference). Reports found=false and m_hat=0 when no
// template correlation clears the gate.
OffsetEstimate estimate_offset(const OfdmSymbol& received,
                               const std::vector<SubcarrierSymbol>& reference,
                               int i, const DetectorConfig& cfg);

// Empirical psi for every subcarrier: per-subcarrier offset estimates, then
// the analytic count evaluated at each estimate, gated so that clean signals
// report zero. Returns the counts and the per-subcarrier offset estimates.
std::pair<PsiVector, std::vector<double>> psi_empirical(
    const OfdmSymbol& received, const std::vector<SubcarrierSymbol>& reference,
    const DetectorConfig& cfg);

// --- Symbol-level report -----------------------------------------------------

enum class Cause { kClean, kJammingSuspected, kWrongNSuspected };

const char* cause_name(Cause c);

struct SubcarrierReport {
    int subcarrier = 0;
    int psi = 0;
    double s = 0.0;      // psi / (n-1)
    double m_hat = 0.0;
    LooVerdict verdict = LooVerdict::kClean;
};

struct DetectionReport {
    std::vector<SubcarrierReport> per_subcarrier;
    Cause cause = Cause::kClean;
    int best_n = 0;          // alternative FFT length, when WrongNSuspected
    int attacked_index = -1; // best-scoring gated subcarrier, -1 if none
};

// Re-evaluation hook for the FFT-length disambiguation: given a candidate n,
// returns the fraction of subcarriers that look clean when the capture is
// re-analyzed under that length.
using CleanFractionFn = std::function<double(int)>;

// Decides between Clean / JammingSuspected / WrongNSuspected from the
// per-subcarrier verdicts. When (almost) every subcarrier reports loss of
// orthogonality the likely cause is an FFT-length mismatch, so the candidates
// are re-checked through clean_fraction_for_n; the best mostly-clean
// candidate wins. Throws when a re-check is needed but no candidates or no
// re-check hook were provided.
Cause disambiguate_cause(const std::vector<LooVerdict>& verdicts,
                         const std::vector<int>& alt_n_candidates,
                         const CleanFractionFn& clean_fraction_for_n,
                         double trigger_fraction, int* best_n = nullptr);

// Full pipeline: psi_empirical -> verdicts -> cause. alt_n_candidates and
// the re-check hook are only consulted when the verdict pattern demands it.
DetectionReport detect_symbol(const OfdmSymbol& received,
                              const std::vector<SubcarrierSymbol>& reference,
                              const DetectorConfig& cfg,
                              const std::vector<int>& alt_n_candidates = {},
                              const CleanFractionFn& clean_fraction_for_n = {});

// CSV rows "subcarrier,psi,s,m_hat,verdict" plus a trailing cause line.
void write_report_csv(const DetectionReport& report, std::ostream& out);

}  // namespace loojam
