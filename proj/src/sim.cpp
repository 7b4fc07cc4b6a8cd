#include "loojam/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "loojam/rng.hpp"

namespace loojam {
namespace {

// Shortest round-trip decimal form; keeps reruns byte-identical.
std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

std::string fmt(long long v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

double parse_double(const std::string& raw, const std::string& key) {
    std::string s = raw;
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty())
        throw std::invalid_argument("bad value for " + key + ": '" + raw + "'");
    return v;
}

long long parse_int(const std::string& raw, const std::string& key) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(raw, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != raw.size() || raw.empty())
        throw std::invalid_argument("bad value for " + key + ": '" + raw + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& raw, const std::string& key) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(raw, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != raw.size() || raw.empty())
        throw std::invalid_argument("bad value for " + key + ": '" + raw + "'");
    return v;
}

bool parse_bool(const std::string& raw, const std::string& key) {
    if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
    if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
    throw std::invalid_argument("bad value for " + key + ": '" + raw + "'");
}

std::vector<double> parse_tau_grid(const std::string& raw) {
    if (raw == "default") return default_tau_grid();
    std::vector<double> out;
    std::istringstream in(raw);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a == std::string::npos)
            throw std::invalid_argument("bad value for run.tau_grid: '" + raw + "'");
        out.push_back(parse_double(item.substr(a, b - a + 1), "run.tau_grid"));
    }
    if (out.empty())
        throw std::invalid_argument("bad value for run.tau_grid: '" + raw + "'");
    return out;
}

}  // namespace

std::vector<double> default_tau_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(static_cast<double>(i) / 20.0);
    return grid;
}

std::vector<SubcarrierSymbol> random_qpsk(int n, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("fft length must be positive");
    std::mt19937_64 rng(seed);
    std::vector<SubcarrierSymbol> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const int quadrant = static_cast<int>(uniform01(rng) * 4.0);
        out.emplace_back(k, 1.0,
                         std::numbers::pi / 4 +
                             std::min(quadrant, 3) * std::numbers::pi / 2);
    }
    return out;
}

TrialRecord run_trial(const TrialConfig& cfg, std::uint64_t trial_index) {
    if (cfg.n <= 0) throw std::invalid_argument("fft length must be positive");
    const std::uint64_t trial_seed = mix_seed(cfg.base_seed, trial_index);

    TrialRecord rec;
    rec.trial_index = trial_index;
    rec.seed = trial_seed;

    const auto content = random_qpsk(cfg.n, mix_seed(trial_seed, 1));
    OfdmSymbol sym = synthesize(content, cfg.n, cfg.scs_hz);

    rec.jammer_present = cfg.jammer_enabled && trial_index % 2 == 0;
    if (rec.jammer_present) {
        std::mt19937_64 arng(mix_seed(trial_seed, 2));
        JammerConfig jc;
        jc.model = cfg.jammer_model;
        jc.jsr_db = cfg.jsr_db;
        jc.amplitude = -1.0;  // derive A_m from the JSR
        switch (cfg.jammer_model) {
            case JammerModel::kFrequencyShift: {
                const int target =
                    cfg.jammer_target
                        ? *cfg.jammer_target
                        : std::min(static_cast<int>(uniform01(arng) * cfg.n),
                                   cfg.n - 1);
                double offset = 0.0;
                if (cfg.jammer_offset) {
                    offset = *cfg.jammer_offset;
                } else {
                    // Fractional digit 0.1..0.9 plus an integer part in
                    // [-2, 2]: attacks that actually break orthogonality.
                    const int digit =
                        std::min(static_cast<int>(uniform01(arng) * 9.0), 8);
                    const int whole =
                        std::min(static_cast<int>(uniform01(arng) * 5.0), 4) - 2;
                    offset = whole + 0.1 * (digit + 1);
                }
                jc.targets = {target};
                jc.offset = offset;
                jc.phase = 2.0 * std::numbers::pi * uniform01(arng);
                sym = apply_frequency_shift(sym, content, jc).attacked;
                rec.true_target = target;
                rec.true_offset = offset;
                break;
            }
            case JammerModel::kBarrageNoise: {
                jc.seed = mix_seed(trial_seed, 2);
                sym = apply_noise_jammer(sym, jc).jammed;
                break;
            }
            case JammerModel::kPilotNulling:
                throw std::invalid_argument(
                    "pilot nulling operates on the resource grid, not on "
                    "symbol trials");
        }
    }

    if (!cfg.channel_profile.empty()) {
        const ChannelProfile profile = load_profile(cfg.channel_profile);
        const ChannelRealization channel = make_realization(
            profile, sym.sample_rate_hz(), mix_seed(trial_seed, 3));
        sym = apply_tdl(sym, channel, cfg.channel_mode);
    }

    if (std::isfinite(cfg.snr_db))
        sym = add_awgn(sym, cfg.snr_db, mix_seed(trial_seed, 4));

    const DetectionReport report = detect_symbol(sym, content, cfg.detector);
    rec.s.reserve(report.per_subcarrier.size());
    for (const auto& row : report.per_subcarrier) {
        rec.s.push_back(row.s);
        rec.max_s = std::max(rec.max_s, row.s);
    }
    rec.attacked_hat = report.attacked_index;
    if (report.attacked_index >= 0)
        rec.m_hat = report
                        .per_subcarrier[static_cast<std::size_t>(
                            report.attacked_index)]
                        .m_hat;
    rec.cause = report.cause;
    return rec;
}

const char* trial_csv_header() {
    return "trial,seed,present,target,m,attacked_hat,m_hat,max_s,cause";
}

std::string trial_csv_row(const TrialRecord& r) {
    std::string row;
    row += fmt(r.trial_index);
    row += ',';
    row += fmt(r.seed);
    row += ',';
    row += r.jammer_present ? '1' : '0';
    row += ',';
    row += fmt(static_cast<long long>(r.true_target));
    row += ',';
    row += fmt(r.true_offset);
    row += ',';
    row += fmt(static_cast<long long>(r.attacked_hat));
    row += ',';
    row += fmt(r.m_hat);
    row += ',';
    row += fmt(r.max_s);
    row += ',';
    row += cause_name(r.cause);
    return row;
}

std::vector<TrialRecord> run_monte_carlo(const TrialConfig& cfg,
                                         std::ostream* sink) {
    if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (sink) {
        *sink << trial_csv_header() << '\n';
        if (!*sink) throw std::runtime_error("trial 0: cannot write records");
    }
    std::vector<TrialRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.trials));
    for (int idx = 0; idx < cfg.trials; ++idx) {
        records.push_back(run_trial(cfg, static_cast<std::uint64_t>(idx)));
        if (sink) {
            *sink << trial_csv_row(records.back()) << '\n';
            if (!*sink)
                throw std::runtime_error("trial " + std::to_string(idx) +
                                         ": cannot write records");
        }
    }
    return records;
}

RocCurve compute_roc(const std::vector<TrialRecord>& records,
                     const std::vector<double>& tau_grid) {
    if (records.empty()) throw std::invalid_argument("no trial records");
    if (tau_grid.empty()) throw std::invalid_argument("empty tau grid");
    for (std::size_t i = 1; i < tau_grid.size(); ++i)
        if (tau_grid[i] < tau_grid[i - 1])
            throw std::invalid_argument("tau grid must be ascending");

    std::size_t n_present = 0;
    std::size_t n_absent = 0;
    for (const auto& r : records) (r.jammer_present ? n_present : n_absent)++;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    RocCurve curve;
    for (double tau : tau_grid) {
        std::size_t detections = 0;
        std::size_t false_alarms = 0;
        for (const auto& r : records) {
            if (r.max_s < tau) continue;
            (r.jammer_present ? detections : false_alarms)++;
        }
        RocPoint pt;
        pt.tau = tau;
        pt.p_d = n_present ? static_cast<double>(detections) /
                                 static_cast<double>(n_present)
                           : nan;
        pt.p_f = n_absent ? static_cast<double>(false_alarms) /
                                static_cast<double>(n_absent)
                          : nan;
        curve.points.push_back(pt);
    }

    if (n_present == 0 || n_absent == 0) {
        curve.auc = nan;
        return curve;
    }
    // Trapezoid over the operating points, anchored at the tau -> infinity
    // and tau = 0 extremes of the decision rule.
    std::vector<std::pair<double, double>> pts{{0.0, 0.0}, {1.0, 1.0}};
    for (const auto& pt : curve.points) pts.emplace_back(pt.p_f, pt.p_d);
    std::sort(pts.begin(), pts.end());
    double auc = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        auc += (pts[i].first - pts[i - 1].first) *
               (pts[i].second + pts[i - 1].second) / 2.0;
    curve.auc = auc;
    return curve;
}

void emit_outputs(const std::vector<LabeledCurve>& curves,
                  const std::filesystem::path& dir) {
    if (curves.empty()) throw std::invalid_argument("no curves to emit");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " +
                                 dir.string());

    const auto roc_path = dir / "roc.csv";
    std::ofstream roc(roc_path, std::ios::binary);
    if (!roc) throw std::runtime_error("cannot write " + roc_path.string());
    roc << "n,snr_db,jsr_db,tau,p_f,p_d,trials\n";
    for (const auto& lc : curves)
        for (const auto& pt : lc.curve.points)
            roc << fmt(static_cast<long long>(lc.n)) << ',' << fmt(lc.snr_db)
                << ',' << fmt(lc.jsr_db) << ',' << fmt(pt.tau) << ','
                << fmt(pt.p_f) << ',' << fmt(pt.p_d) << ','
                << fmt(static_cast<long long>(lc.trials)) << '\n';
    roc.close();
    if (!roc) throw std::runtime_error("cannot write " + roc_path.string());

    const auto summary_path = dir / "summary.csv";
    std::ofstream summary(summary_path, std::ios::binary);
    if (!summary)
        throw std::runtime_error("cannot write " + summary_path.string());
    summary << "n,auc\n";
    for (const auto& lc : curves)
        summary << fmt(static_cast<long long>(lc.n)) << ','
                << fmt(lc.curve.auc) << '\n';
    summary.close();
    if (!summary)
        throw std::runtime_error("cannot write " + summary_path.string());
}

// --- Config files ------------------------------------------------------------

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"signal", {"n", "scs_hz"}},
        {"channel", {"profile", "mode", "snr_db"}},
        {"jammer", {"enabled", "model", "jsr_db", "target", "offset"}},
        {"detector",
         {"epsilon", "tau", "grid_step", "grid_range", "gate_margin",
          "gate_floor", "min_evidence", "window_halfwidth", "wrong_n_trigger",
          "scan", "attribution"}},
        {"antijam", {"policy", "candidate_step", "candidate_max"}},
        {"run", {"trials", "base_seed", "tau_grid"}},
    };
    return keys;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

RunConfig load_run_config(const std::string& text,
                          const std::filesystem::path& base_dir) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument(std::string("config parse: ") + e.what());
    }

    for (const auto& section : tree) {
        if (section.second.empty())
            throw std::invalid_argument("config key outside a section: " +
                                        section.first);
        const auto known = known_keys().find(section.first);
        if (known == known_keys().end())
            throw std::invalid_argument("unknown config section: [" +
                                        section.first + "]");
        for (const auto& kv : section.second)
            if (!known->second.count(kv.first))
                throw std::invalid_argument("unknown config key: " +
                                            section.first + "." + kv.first);
    }

    RunConfig rc;
    TrialConfig& tc = rc.trial;
    const auto str = [&](const char* key) {
        return tree.get_optional<std::string>(key);
    };

    if (auto v = str("signal.n")) {
        const long long n = parse_int(*v, "signal.n");
        if (n < 2 || n > (1 << 20))
            throw std::invalid_argument("signal.n out of range: " + *v);
        tc.n = static_cast<int>(n);
    }
    if (auto v = str("signal.scs_hz")) {
        tc.scs_hz = parse_double(*v, "signal.scs_hz");
        if (!(tc.scs_hz > 0.0))
            throw std::invalid_argument("signal.scs_hz must be positive");
    }

    if (auto v = str("channel.profile")) {
        if (*v != "none" && !v->empty())
            tc.channel_profile = read_text_file(
                base_dir.empty() ? std::filesystem::path(*v) : base_dir / *v);
    }
    if (auto v = str("channel.mode")) {
        if (*v == "circular") tc.channel_mode = ConvolutionMode::kCircular;
        else if (*v == "linear") tc.channel_mode = ConvolutionMode::kLinear;
        else throw std::invalid_argument("bad value for channel.mode: '" + *v + "'");
    }
    if (auto v = str("channel.snr_db")) tc.snr_db = parse_double(*v, "channel.snr_db");

    if (auto v = str("jammer.enabled")) tc.jammer_enabled = parse_bool(*v, "jammer.enabled");
    if (auto v = str("jammer.model")) {
        if (*v == "frequency_shift") tc.jammer_model = JammerModel::kFrequencyShift;
        else if (*v == "barrage") tc.jammer_model = JammerModel::kBarrageNoise;
        else throw std::invalid_argument("bad value for jammer.model: '" + *v + "'");
    }
    if (auto v = str("jammer.jsr_db")) tc.jsr_db = parse_double(*v, "jammer.jsr_db");
    if (auto v = str("jammer.target")) {
        if (*v != "random")
            tc.jammer_target = static_cast<int>(parse_int(*v, "jammer.target"));
    }
    if (auto v = str("jammer.offset")) {
        if (*v != "random") tc.jammer_offset = parse_double(*v, "jammer.offset");
    }

    DetectorConfig& dc = tc.detector;
    if (auto v = str("detector.epsilon")) dc.epsilon = parse_double(*v, "detector.epsilon");
    if (auto v = str("detector.tau")) dc.tau = parse_double(*v, "detector.tau");
    if (auto v = str("detector.grid_step")) dc.grid_step = parse_double(*v, "detector.grid_step");
    if (auto v = str("detector.grid_range")) dc.grid_range = parse_double(*v, "detector.grid_range");
    if (auto v = str("detector.gate_margin")) dc.gate_margin = parse_double(*v, "detector.gate_margin");
    if (auto v = str("detector.gate_floor")) dc.gate_floor = parse_double(*v, "detector.gate_floor");
    if (auto v = str("detector.min_evidence")) dc.min_evidence = parse_double(*v, "detector.min_evidence");
    if (auto v = str("detector.window_halfwidth")) dc.window_halfwidth = parse_double(*v, "detector.window_halfwidth");
    if (auto v = str("detector.wrong_n_trigger")) dc.wrong_n_trigger = parse_double(*v, "detector.wrong_n_trigger");
    if (auto v = str("detector.scan")) {
        if (*v == "full") dc.scan = ScanPolicy::kFull;
        else if (*v == "windowed") dc.scan = ScanPolicy::kWindowed;
        else throw std::invalid_argument("bad value for detector.scan: '" + *v + "'");
    }
    if (auto v = str("detector.attribution")) {
        if (*v == "competitive") dc.attribution = Attribution::kCompetitive;
        else if (*v == "independent") dc.attribution = Attribution::kIndependent;
        else throw std::invalid_argument("bad value for detector.attribution: '" + *v + "'");
    }

    if (auto v = str("antijam.policy")) {
        if (*v == "negation") rc.antijam.policy = CorrectionPolicy::kOffsetNegation;
        else if (*v == "avoidance") rc.antijam.policy = CorrectionPolicy::kResonanceAvoidance;
        else throw std::invalid_argument("bad value for antijam.policy: '" + *v + "'");
    }
    if (auto v = str("antijam.candidate_step")) {
        rc.antijam.candidate_step = parse_double(*v, "antijam.candidate_step");
        if (!(rc.antijam.candidate_step > 0.0))
            throw std::invalid_argument("antijam.candidate_step must be positive");
    }
    if (auto v = str("antijam.candidate_max")) {
        rc.antijam.candidate_max = parse_double(*v, "antijam.candidate_max");
        if (rc.antijam.candidate_max < 0.0)
            throw std::invalid_argument("antijam.candidate_max must be non-negative");
    }

    if (auto v = str("run.trials")) {
        const long long trials = parse_int(*v, "run.trials");
        if (trials < 1) throw std::invalid_argument("run.trials must be >= 1");
        tc.trials = static_cast<int>(trials);
    }
    if (auto v = str("run.base_seed")) tc.base_seed = parse_u64(*v, "run.base_seed");
    if (auto v = str("run.tau_grid")) tc.tau_grid = parse_tau_grid(*v);

    return rc;
}

RunConfig load_run_config_file(const std::filesystem::path& path) {
    return load_run_config(read_text_file(path), path.parent_path());
}

}  // namespace loojam
