#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "loojam/antijam.hpp"
#include "loojam/channel.hpp"
#include "loojam/detector.hpp"
#include "loojam/jammer.hpp"
#include "loojam/ofdm.hpp"

namespace loojam {

// Thresholds 0, 0.05, ..., 1.0.
std::vector<double> default_tau_grid();

// Unit-amplitude QPSK on all n subcarriers, deterministic per seed.
std::vector<SubcarrierSymbol> random_qpsk(int n, std::uint64_t seed);

// One Monte-Carlo experiment: a batch of seeded trials at fixed signal,
// channel, jammer and detector settings.
struct TrialConfig {
    int n = 256;
    double scs_hz = 15e3;
    double snr_db = 5.0;             // infinity disables the noise stage
    std::string channel_profile;     // profile text; empty = no fading
    ConvolutionMode channel_mode = ConvolutionMode::kCircular;

    bool jammer_enabled = true;      // false = every trial is clean
    JammerModel jammer_model = JammerModel::kFrequencyShift;
    double jsr_db = 0.0;
    std::optional<int> jammer_target;     // fixed target; empty = uniform draw
    std::optional<double> jammer_offset;  // fixed offset; empty = random draw

    int trials = 2000;
    std::uint64_t base_seed = 1;
    DetectorConfig detector;
    std::vector<double> tau_grid = default_tau_grid();
};

// Ground truth comes from the attack configuration, never from the detector.
struct TrialRecord {
    std::uint64_t trial_index = 0;
    std::uint64_t seed = 0;          // mixed per-trial seed
    bool jammer_present = false;
    int true_target = -1;            // attacked subcarrier, -1 when absent
    double true_offset = 0.0;
    std::vector<double> s;           // per-subcarrier statistic psi/(n-1)
    double max_s = 0.0;
    int attacked_hat = -1;           // detector's pick, -1 when none
    double m_hat = 0.0;              // detector's offset at its pick
    Cause cause = Cause::kClean;
};

// Deterministic in (cfg, trial_index): the trial seed is
// mix_seed(base_seed, trial_index) and the content/attack/channel/noise
// stages draw from mix_seed(trial_seed, 1..4). The jammer is present on
// even trial indices (half the trials, rounded up, interleaved).
TrialRecord run_trial(const TrialConfig& cfg, std::uint64_t trial_index);

// Runs cfg.trials trials; when sink is given, streams one CSV row per trial
// (trial_csv_header first). I/O failures report the trial index.
std::vector<TrialRecord> run_monte_carlo(const TrialConfig& cfg,
                                         std::ostream* sink = nullptr);

const char* trial_csv_header();
std::string trial_csv_row(const TrialRecord& record);

// One operating point: decide "attacked" iff max_i s(i) >= tau. A
// coordinate is NaN when no trial carries that ground-truth label (a
// detection rate over zero jammer-present trials is undefined, not zero).
struct RocPoint {
    double tau = 0.0;
    double p_f = 0.0;  // false alarms / jammer-absent trials
    double p_d = 0.0;  // detections / jammer-present trials
};

struct RocCurve {
    std::vector<RocPoint> points;  // in tau_grid order
    double auc = 0.0;              // trapezoid over (p_f, p_d) with (0,0)
                                   // and (1,1) anchors; NaN when degenerate
};

RocCurve compute_roc(const std::vector<TrialRecord>& records,
                     const std::vector<double>& tau_grid);

// A curve plus the configuration axes it was measured on.
struct LabeledCurve {
    int n = 0;
    double snr_db = 0.0;
    double jsr_db = 0.0;
    int trials = 0;
    RocCurve curve;
};

// Writes roc.csv (n,snr_db,jsr_db,tau,p_f,p_d,trials) and summary.csv
// (n,auc) under dir; identical inputs give identical bytes.
void emit_outputs(const std::vector<LabeledCurve>& curves,
                  const std::filesystem::path& dir);

// --- Config files ------------------------------------------------------------

struct AntijamConfig {
    CorrectionPolicy policy = CorrectionPolicy::kOffsetNegation;
    double candidate_step = 0.5;  // avoidance-rule grid
    double candidate_max = 4.0;
};

struct RunConfig {
    TrialConfig trial;
    AntijamConfig antijam;
};

// INI-style config with sections [signal], [channel], [jammer], [detector],
// [antijam], [run]; unknown keys are rejected. channel.profile names a
// profile file resolved relative to base_dir (empty value or "none"
// disables fading).
RunConfig load_run_config(const std::string& text,
                          const std::filesystem::path& base_dir = {});
RunConfig load_run_config_file(const std::filesystem::path& path);

}  // namespace loojam
