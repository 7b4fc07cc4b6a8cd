#pragma once

#include <cstdint>
#include <vector>

#include "loojam/ofdm.hpp"
#include "loojam/ssb_grid.hpp"

namespace loojam {

enum class JammerModel { kFrequencyShift, kBarrageNoise, kPilotNulling };

struct JammerConfig {
    JammerModel model = JammerModel::kFrequencyShift;
    std::vector<int> targets;       // attacked subcarrier indices (FrequencyShift)
    double offset = 0.5;            // multiplicative tone offset m, may be fractional
    double amplitude = -1.0;        // A_m; negative means "derive from jsr_db"
    double phase = 0.0;             // jammer tone phase, radians
    double jsr_db = 0.0;
    std::uint64_t seed = 0;         // noise draw seed (BarrageNoise)
};

struct AttackRecord {
    JammerModel model = JammerModel::kFrequencyShift;
    std::vector<int> targets;            // subcarriers (FrequencyShift)
    std::vector<RePosition> re_targets;  // REs (PilotNulling)
    double offset = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;
    double jsr_db = 0.0;
    double realized_jammer_power = 0.0;  // mean |attacked - clean|^2 per sample
    std::uint64_t seed = 0;
};

struct FrequencyShiftResult {
    OfdmSymbol attacked;
    AttackRecord record;
};

// Replaces each targeted contribution c_i[n] by c_i[n] * X_m e^{j 2 pi m n / N}:
// the targeted tone moves from bin i to i + m and picks up the jammer's
// complex gain. All other contributions are untouched. When cfg.amplitude is
// negative, A_m = 10^{jsr_db/20} times the mean content amplitude.
FrequencyShiftResult apply_frequency_shift(const OfdmSymbol& clean,
                                           const std::vector<SubcarrierSymbol>& content,
                                           const JammerConfig& cfg);

struct NoiseJamResult {
    OfdmSymbol jammed;
    AttackRecord record;
};

// Adds circular complex Gaussian noise with power jsr_db relative to the
// clean symbol power (barrage-style wideband jamming).
NoiseJamResult apply_noise_jammer(const OfdmSymbol& clean, const JammerConfig& cfg);

struct PilotNullingResult {
    SsbSignal attacked;
    AttackRecord record;
};

// Adds -X at every PbchDmrs RE, zeroing the pilots; payload REs are copied
// bitwise.
PilotNullingResult apply_pilot_nulling(const SsbSignal& clean, const JammerConfig& cfg);

// Scales a jammer waveform so that power(jam)/reference_power hits jsr_db.
std::vector<cd> scale_to_jsr(const std::vector<cd>& jam, double reference_power,
                             double jsr_db);

}  // namespace loojam
