#include "loojam/jammer.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "loojam/rng.hpp"

namespace loojam {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mean_power(const std::vector<cd>& x) {
    double acc = 0.0;
    for (const cd& v : x) acc += std::norm(v);
    return acc / static_cast<double>(x.size());
}

}  // namespace

FrequencyShiftResult apply_frequency_shift(const OfdmSymbol& clean,
                                           const std::vector<SubcarrierSymbol>& content,
                                           const JammerConfig& cfg) {
    if (cfg.model != JammerModel::kFrequencyShift) {
        throw std::invalid_argument("config is not a frequency-shift jammer");
    }
    if (cfg.targets.empty()) throw std::invalid_argument("no target subcarriers");
    if (!std::isfinite(cfg.offset)) throw std::invalid_argument("offset must be finite");
    const int n = clean.n_fft;

    std::vector<cd> bin_values(static_cast<size_t>(n), cd{0.0, 0.0});
    double amplitude_sum = 0.0;
    std::set<int> seen;
    for (const SubcarrierSymbol& s : content) {
        if (s.index < 0 || s.index >= n) {
            throw std::invalid_argument("content index out of range");
        }
        if (!seen.insert(s.index).second) {
            throw std::invalid_argument("duplicate content index");
        }
        bin_values[static_cast<size_t>(s.index)] = s.value();
        amplitude_sum += s.amplitude;
    }
    if (content.empty()) throw std::invalid_argument("content must not be empty");

    double a_m = cfg.amplitude;
    if (a_m < 0.0) {
        a_m = std::pow(10.0, cfg.jsr_db / 20.0) * amplitude_sum /
              static_cast<double>(content.size());
    }
    const cd x_m = std::polar(a_m, cfg.phase);

    FrequencyShiftResult out;
    out.attacked = clean;
    for (int target : cfg.targets) {
        if (target < 0 || target >= n) {
            throw std::invalid_argument("target subcarrier out of range");
        }
        const cd x_i = bin_values[static_cast<size_t>(target)];
        for (int t = 0; t < n; ++t) {
            cd original = x_i / static_cast<double>(n) *
                          std::polar(1.0, kTwoPi * target * t / n);
            cd shifted = x_i * x_m / static_cast<double>(n) *
                         std::polar(1.0, kTwoPi * (target + cfg.offset) * t / n);
            out.attacked.samples[static_cast<size_t>(t)] += shifted - original;
        }
    }

    out.record.model = JammerModel::kFrequencyShift;
    out.record.targets = cfg.targets;
    out.record.offset = cfg.offset;
    out.record.amplitude = a_m;
    out.record.phase = cfg.phase;
    out.record.jsr_db = cfg.jsr_db;
    out.record.seed = cfg.seed;
    double delta = 0.0;
    for (int t = 0; t < n; ++t) {
        delta += std::norm(out.attacked.samples[static_cast<size_t>(t)] -
                           clean.samples[static_cast<size_t>(t)]);
    }
    out.record.realized_jammer_power = delta / static_cast<double>(n);
    return out;
}

NoiseJamResult apply_noise_jammer(const OfdmSymbol& clean, const JammerConfig& cfg) {
    if (cfg.model != JammerModel::kBarrageNoise) {
        throw std::invalid_argument("config is not a barrage-noise jammer");
    }
    const double signal_power = mean_power(clean.samples);
    if (signal_power <= 0.0) {
        throw std::invalid_argument("clean symbol has no power to jam against");
    }
    const double jam_power = signal_power * std::pow(10.0, cfg.jsr_db / 10.0);
    const double scale = std::sqrt(jam_power);

    NoiseJamResult out;
    out.jammed = clean;
    ComplexGaussian noise(cfg.seed);
    double realized = 0.0;
    for (cd& s : out.jammed.samples) {
        cd w = scale * noise.next();
        realized += std::norm(w);
        s += w;
    }

    out.record.model = JammerModel::kBarrageNoise;
    out.record.jsr_db = cfg.jsr_db;
    out.record.amplitude = scale;
    out.record.seed = cfg.seed;
    out.record.realized_jammer_power = realized / static_cast<double>(clean.n_fft);
    return out;
}

PilotNullingResult apply_pilot_nulling(const SsbSignal& clean, const JammerConfig& cfg) {
    if (cfg.model != JammerModel::kPilotNulling) {
        throw std::invalid_argument("config is not a pilot-nulling jammer");
    }
    if (!validate_grid(clean.grid).empty()) {
        throw std::invalid_argument("signal grid is not well formed");
    }

    PilotNullingResult out;
    out.attacked = clean;
    out.record.model = JammerModel::kPilotNulling;
    out.record.jsr_db = cfg.jsr_db;
    out.record.seed = cfg.seed;
    out.record.re_targets = dmrs_positions(clean.grid);

    double delta = 0.0;
    for (const RePosition& pos : out.record.re_targets) {
        size_t idx = static_cast<size_t>(pos.symbol * SsbGrid::kNumSubcarriers +
                                         pos.subcarrier);
        delta += std::norm(out.attacked.values[idx]);
        out.attacked.values[idx] += -out.attacked.values[idx];
    }
    out.record.realized_jammer_power =
        delta / static_cast<double>(clean.values.size());
    return out;
}

std::vector<cd> scale_to_jsr(const std::vector<cd>& jam, double reference_power,
                             double jsr_db) {
    if (jam.empty()) throw std::invalid_argument("empty jammer waveform");
    if (!(reference_power > 0.0)) {
        throw std::invalid_argument("reference power must be positive");
    }
    const double current = mean_power(jam);
    if (current <= 0.0) {
        throw std::invalid_argument("jammer waveform has zero power");
    }
    const double target = reference_power * std::pow(10.0, jsr_db / 10.0);
    const double scale = std::sqrt(target / current);
    std::vector<cd> out = jam;
    for (cd& v : out) v *= scale;
    return out;
}

}  // namespace loojam
