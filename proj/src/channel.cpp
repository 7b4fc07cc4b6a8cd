#include "loojam/channel.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "loojam/rng.hpp"

namespace loojam {
namespace {

std::string trim(const std::string& s) {
    size_t first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    size_t last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

// Parses "[[a, b], [c, d], ...]" into delay/power pairs.
std::vector<ChannelTap> parse_tap_list(const std::string& value) {
    std::vector<ChannelTap> taps;
    std::string v = trim(value);
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
        throw std::invalid_argument("taps must be a bracketed list");
    }
    std::string inner = trim(v.substr(1, v.size() - 2));
    size_t pos = 0;
    while (pos < inner.size()) {
        size_t open = inner.find('[', pos);
        if (open == std::string::npos) break;
        size_t close = inner.find(']', open);
        if (close == std::string::npos) {
            throw std::invalid_argument("unterminated tap entry");
        }
        std::string entry = inner.substr(open + 1, close - open - 1);
        std::istringstream es(entry);
        std::string a;
        std::string b;
        if (!std::getline(es, a, ',') || !std::getline(es, b)) {
            throw std::invalid_argument("tap entry needs delay and power");
        }
        std::string extra;
        if (std::getline(es, extra)) {
            throw std::invalid_argument("tap entry has trailing fields");
        }
        ChannelTap tap;
        size_t used = 0;
        tap.delay_s = std::stod(trim(a), &used);
        if (used != trim(a).size()) throw std::invalid_argument("bad tap delay");
        tap.power = std::stod(trim(b), &used);
        if (used != trim(b).size()) throw std::invalid_argument("bad tap power");
        taps.push_back(tap);
        pos = close + 1;
    }
    return taps;
}

bool parse_bool(const std::string& value) {
    std::string v = trim(value);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("has_los must be true or false");
}

}  // namespace

ChannelProfile load_profile(const std::string& text) {
    ChannelProfile profile;
    bool saw_taps = false;
    bool saw_los = false;

    // Assemble logical lines: a value may continue across physical lines
    // until its brackets balance.
    std::vector<std::string> lines;
    std::istringstream is(text);
    std::string raw;
    std::string pending;
    int depth = 0;
    while (std::getline(is, raw)) {
        size_t comment = raw.find_first_of(";#");
        if (comment != std::string::npos) raw = raw.substr(0, comment);
        raw = trim(raw);
        if (raw.empty()) continue;
        for (char c : raw) {
            if (c == '[') ++depth;
            if (c == ']') --depth;
        }
        pending = pending.empty() ? raw : pending + " " + raw;
        if (depth <= 0) {
            lines.push_back(pending);
            pending.clear();
            depth = 0;
        }
    }
    if (!pending.empty()) throw std::invalid_argument("unbalanced brackets in profile");

    for (const std::string& line : lines) {
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("profile line is not key = value: " + line);
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "taps") {
            profile.taps = parse_tap_list(value);
            saw_taps = true;
        } else if (key == "has_los") {
            profile.has_los = parse_bool(value);
            saw_los = true;
        } else {
            throw std::invalid_argument("unknown profile key: " + key);
        }
    }

    if (!saw_taps) throw std::invalid_argument("profile is missing taps");
    if (!saw_los) throw std::invalid_argument("profile is missing has_los");
    if (profile.taps.empty()) throw std::invalid_argument("profile has no taps");

    double total = 0.0;
    double prev_delay = -1.0;
    for (const ChannelTap& tap : profile.taps) {
        if (!(tap.delay_s >= 0.0)) {
            throw std::invalid_argument("tap delays must be non-negative");
        }
        if (tap.delay_s < prev_delay) {
            throw std::invalid_argument("tap delays must be non-decreasing");
        }
        prev_delay = tap.delay_s;
        if (!(tap.power > 0.0)) {
            throw std::invalid_argument("tap powers must be positive");
        }
        total += tap.power;
    }
    for (ChannelTap& tap : profile.taps) tap.power /= total;
    return profile;
}

ChannelProfile load_profile_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_profile(buf.str());
}

ChannelRealization make_realization(const ChannelProfile& profile,
                                    double sample_rate_hz, std::uint64_t seed) {
    if (!(sample_rate_hz > 0.0)) {
        throw std::invalid_argument("sample rate must be positive");
    }
    if (profile.taps.empty()) throw std::invalid_argument("profile has no taps");

    int max_idx = 0;
    for (const ChannelTap& tap : profile.taps) {
        max_idx = std::max(max_idx,
                           static_cast<int>(std::llround(tap.delay_s * sample_rate_hz)));
    }

    ChannelRealization out;
    out.sample_rate_hz = sample_rate_hz;
    out.seed = seed;
    out.gains.assign(static_cast<size_t>(max_idx) + 1, cd{0.0, 0.0});

    ComplexGaussian fading(seed);
    for (size_t t = 0; t < profile.taps.size(); ++t) {
        const ChannelTap& tap = profile.taps[t];
        int idx = static_cast<int>(std::llround(tap.delay_s * sample_rate_hz));
        cd gain;
        if (profile.has_los && t == 0) {
            gain = {std::sqrt(tap.power), 0.0};
        } else {
            gain = std::sqrt(tap.power) * fading.next();
        }
        out.gains[static_cast<size_t>(idx)] += gain;
    }
    return out;
}

OfdmSymbol apply_tdl(const OfdmSymbol& symbol, const ChannelRealization& channel,
                     ConvolutionMode mode) {
    const double fs = symbol.sample_rate_hz();
    if (std::abs(fs - channel.sample_rate_hz) > 1e-6 * fs) {
        throw std::invalid_argument("channel was realized at a different sample rate");
    }
    const int n = symbol.n_fft;
    const int taps = static_cast<int>(channel.gains.size());

    OfdmSymbol out = symbol;
    for (int t = 0; t < n; ++t) {
        cd acc{0.0, 0.0};
        for (int d = 0; d < taps; ++d) {
            int src = t - d;
            if (mode == ConvolutionMode::kCircular) {
                src = ((src % n) + n) % n;
            } else if (src < 0) {
                continue;
            }
            acc += channel.gains[static_cast<size_t>(d)] *
                   symbol.samples[static_cast<size_t>(src)];
        }
        out.samples[static_cast<size_t>(t)] = acc;
    }
    return out;
}

OfdmSymbol add_awgn(const OfdmSymbol& symbol, double snr_db, std::uint64_t seed) {
    double power = 0.0;
    for (const cd& s : symbol.samples) power += std::norm(s);
    power /= static_cast<double>(symbol.n_fft);
    if (!(power > 0.0)) {
        throw std::invalid_argument("symbol has no power; SNR undefined");
    }
    const double sigma = std::sqrt(power * std::pow(10.0, -snr_db / 10.0));

    OfdmSymbol out = symbol;
    ComplexGaussian noise(seed);
    for (cd& s : out.samples) s += sigma * noise.next();
    return out;
}

}  // namespace loojam
