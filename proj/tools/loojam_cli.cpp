// Command-line front end: resource-grid inspection, symbol synthesis,
// detection/correction on captured IQ, and the Monte-Carlo ROC harness.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loojam/antijam.hpp"
#include "loojam/detector.hpp"
#include "loojam/jammer.hpp"
#include "loojam/ofdm.hpp"
#include "loojam/sim.hpp"
#include "loojam/ssb_grid.hpp"

namespace {

using loojam::cd;
using loojam::OfdmSymbol;
using loojam::SubcarrierSymbol;

std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

// --- IQ file formats ---------------------------------------------------------
//
// Binary: magic "IQF1", then little-endian u32 fft length, f64 subcarrier
// spacing in Hz, and length interleaved (f64 re, f64 im) pairs.
// CSV: "re,im" rows (header optional); the fft length is the row count.

constexpr char kIqMagic[4] = {'I', 'Q', 'F', '1'};

void write_iq_binary(const OfdmSymbol& sym, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(kIqMagic, 4);
    const std::uint32_t n = static_cast<std::uint32_t>(sym.n_fft);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&sym.scs_hz), sizeof sym.scs_hz);
    for (const cd& s : sym.samples) {
        const double re = s.real();
        const double im = s.imag();
        out.write(reinterpret_cast<const char*>(&re), sizeof re);
        out.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
    if (!out) throw std::runtime_error("cannot write " + path);
}

void write_iq_csv(const OfdmSymbol& sym, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "re,im\n";
    for (const cd& s : sym.samples)
        out << fmt(s.real()) << ',' << fmt(s.imag()) << '\n';
    if (!out) throw std::runtime_error("cannot write " + path);
}

double parse_field(const std::string& field, const std::string& path) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(field, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != field.size() || field.empty())
        throw std::runtime_error(path + ": bad numeric field '" + field + "'");
    return v;
}

OfdmSymbol read_iq(const std::string& path, double csv_scs_hz) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::memcmp(magic, kIqMagic, 4) == 0) {
        std::uint32_t n = 0;
        double scs = 0.0;
        in.read(reinterpret_cast<char*>(&n), sizeof n);
        in.read(reinterpret_cast<char*>(&scs), sizeof scs);
        if (!in || n == 0 || n > (1u << 20) || !(scs > 0.0))
            throw std::runtime_error(path + ": corrupt IQ header");
        std::vector<cd> samples;
        samples.reserve(n);
        for (std::uint32_t t = 0; t < n; ++t) {
            double re = 0.0;
            double im = 0.0;
            in.read(reinterpret_cast<char*>(&re), sizeof re);
            in.read(reinterpret_cast<char*>(&im), sizeof im);
            if (!in) throw std::runtime_error(path + ": truncated IQ data");
            samples.emplace_back(re, im);
        }
        return OfdmSymbol::from_samples(std::move(samples), scs);
    }

    // Not the binary magic: parse the whole file as CSV re,im rows.
    in.clear();
    in.seekg(0);
    std::vector<cd> samples;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (samples.empty() && line.rfind("re,", 0) == 0) continue;  // header
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error(path + ": expected 're,im' rows");
        samples.emplace_back(parse_field(line.substr(0, comma), path),
                             parse_field(line.substr(comma + 1), path));
    }
    if (samples.empty()) throw std::runtime_error(path + ": no samples");
    return OfdmSymbol::from_samples(std::move(samples), csv_scs_hz);
}

// Reference description: CSV rows "k,amplitude,phase" (header optional).
std::vector<SubcarrierSymbol> read_reference(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<SubcarrierSymbol> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (out.empty() && line.rfind("k,", 0) == 0) continue;  // header
        std::istringstream row(line);
        std::string k_s, a_s, p_s;
        if (!std::getline(row, k_s, ',') || !std::getline(row, a_s, ',') ||
            !std::getline(row, p_s))
            throw std::runtime_error(path + ": expected 'k,amplitude,phase' rows");
        out.emplace_back(static_cast<int>(parse_field(k_s, path)),
                         parse_field(a_s, path), parse_field(p_s, path));
    }
    if (out.empty()) throw std::runtime_error(path + ": no reference rows");
    return out;
}

void write_reference(const std::vector<SubcarrierSymbol>& content,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "k,amplitude,phase\n";
    for (const auto& s : content)
        out << s.index << ',' << fmt(s.amplitude) << ',' << fmt(s.phase)
            << '\n';
    if (!out) throw std::runtime_error("cannot write " + path);
}

// --- grid --------------------------------------------------------------------

int cmd_grid(int dmrs_shift, const std::string& csv_path, bool ascii) {
    const loojam::SsbGrid grid = loojam::build_ssb_grid(dmrs_shift);
    const auto problems = loojam::validate_grid(grid);
    for (const auto& p : problems) std::cerr << "warning: " << p << '\n';

    if (!csv_path.empty()) {
        if (csv_path == "-") {
            loojam::write_grid_csv(grid, std::cout);
        } else {
            std::ofstream out(csv_path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write " + csv_path);
            loojam::write_grid_csv(grid, out);
        }
        return 0;
    }

    std::cout << "symbols," << loojam::SsbGrid::kNumSymbols << '\n'
              << "subcarriers," << loojam::SsbGrid::kNumSubcarriers << '\n'
              << "pss," << grid.count(loojam::ReKind::kPss) << '\n'
              << "sss," << grid.count(loojam::ReKind::kSss) << '\n'
              << "pbch_re," << grid.pbch_re_count() << '\n'
              << "pbch_payload," << grid.count(loojam::ReKind::kPbchPayload)
              << '\n'
              << "pbch_dmrs," << grid.count(loojam::ReKind::kPbchDmrs) << '\n';
    if (ascii) std::cout << loojam::render_grid_ascii(grid);
    return 0;
}

// --- synth -------------------------------------------------------------------

int cmd_synth(int n, double scs_hz, std::uint64_t seed,
              const std::string& iq_path, const std::string& format,
              const std::string& ref_path, std::optional<int> target,
              double offset, double amplitude, double phase,
              std::optional<double> snr_db, std::uint64_t noise_seed) {
    const auto content = loojam::random_qpsk(n, seed);
    OfdmSymbol sym = loojam::synthesize(content, n, scs_hz);
    if (target) {
        loojam::JammerConfig jc;
        jc.targets = {*target};
        jc.offset = offset;
        jc.amplitude = amplitude;
        jc.phase = phase;
        sym = loojam::apply_frequency_shift(sym, content, jc).attacked;
    }
    if (snr_db) sym = loojam::add_awgn(sym, *snr_db, noise_seed);

    if (!ref_path.empty()) write_reference(content, ref_path);
    if (format == "csv")
        write_iq_csv(sym, iq_path);
    else
        write_iq_binary(sym, iq_path);
    std::cout << "wrote " << iq_path;
    if (!ref_path.empty()) std::cout << " and " << ref_path;
    std::cout << '\n';
    return 0;
}

// --- detect ------------------------------------------------------------------

// Fraction of subcarriers whose residual stays below the mean reference
// power when the capture prefix is re-analyzed at a candidate length.
double clean_fraction_at(const OfdmSymbol& capture,
                         const std::vector<SubcarrierSymbol>& reference,
                         int n) {
    if (static_cast<int>(capture.samples.size()) < n) return 0.0;
    std::vector<cd> prefix(capture.samples.begin(),
                           capture.samples.begin() + n);
    const auto bins = loojam::analyze_bins(
        OfdmSymbol::from_samples(std::move(prefix), capture.scs_hz));
    std::vector<cd> want(static_cast<std::size_t>(n), cd{0.0, 0.0});
    double mean_power = 0.0;
    for (const auto& s : reference) {
        if (s.index < 0 || s.index >= n) continue;
        want[static_cast<std::size_t>(s.index)] = s.value();
    }
    for (const auto& w : want) mean_power += std::norm(w);
    mean_power /= n;
    if (mean_power <= 0.0) return 0.0;
    int clean = 0;
    for (int k = 0; k < n; ++k)
        if (std::norm(bins[static_cast<std::size_t>(k)] -
                      want[static_cast<std::size_t>(k)]) <= mean_power)
            ++clean;
    return static_cast<double>(clean) / n;
}

int cmd_detect(const std::string& iq_path, double csv_scs,
               const std::string& ref_path, const std::string& config_path,
               const std::vector<int>& alt_n, bool correct,
               const std::string& out_path) {
    loojam::RunConfig rc;
    if (!config_path.empty()) rc = loojam::load_run_config_file(config_path);

    const OfdmSymbol capture = read_iq(iq_path, csv_scs);
    const auto reference = read_reference(ref_path);

    loojam::CleanFractionFn fraction_fn;
    if (!alt_n.empty())
        fraction_fn = [&](int n) {
            return clean_fraction_at(capture, reference, n);
        };
    const loojam::DetectionReport report = loojam::detect_symbol(
        capture, reference, rc.trial.detector, alt_n, fraction_fn);

    std::ostringstream body;
    if (!correct) {
        loojam::write_report_csv(report, body);
    } else {
        // Same rows plus before/after counts on the corrected subcarrier.
        std::optional<loojam::CorrectionOutcome> outcome;
        loojam::CorrectionSignal corr;
        if (report.attacked_index >= 0) {
            const auto& row = report.per_subcarrier[static_cast<std::size_t>(
                report.attacked_index)];
            if (rc.antijam.policy == loojam::CorrectionPolicy::kOffsetNegation) {
                corr = loojam::select_m_prime_negation(row.m_hat);
            } else {
                const auto m_prime = loojam::select_m_prime_avoidance(
                    report.attacked_index, capture.n_fft,
                    loojam::avoidance_candidates(rc.antijam.candidate_step,
                                                 rc.antijam.candidate_max));
                if (!m_prime)
                    throw std::runtime_error(
                        "avoidance rule exhausted its candidate grid");
                corr.m_prime = *m_prime;
                corr.policy = loojam::CorrectionPolicy::kResonanceAvoidance;
            }
            const OfdmSymbol corrected = loojam::correct_symbol(
                capture, reference, report.attacked_index, corr);
            outcome = loojam::verify_restoration(capture, corrected, reference,
                                                 report.attacked_index,
                                                 rc.trial.detector);
        }
        body << "subcarrier,psi,s,m_hat,verdict,psi_before,psi_after\n";
        for (const auto& row : report.per_subcarrier) {
            body << row.subcarrier << ',' << row.psi << ',' << fmt(row.s)
                 << ',' << fmt(row.m_hat) << ','
                 << loojam::verdict_name(row.verdict);
            if (outcome && row.subcarrier == report.attacked_index)
                body << ',' << outcome->psi_before << ','
                     << outcome->psi_after;
            else
                body << ",,";
            body << '\n';
        }
        body << "cause," << loojam::cause_name(report.cause);
        if (report.cause == loojam::Cause::kWrongNSuspected)
            body << ',' << report.best_n;
        body << '\n';
        if (outcome)
            body << "correction,m_prime," << fmt(corr.m_prime)
                 << ",residual_leakage," << fmt(outcome->residual_leakage)
                 << '\n';
        else
            body << "correction,none\n";
    }

    if (out_path.empty() || out_path == "-") {
        std::cout << body.str();
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << body.str();
        if (!out) throw std::runtime_error("cannot write " + out_path);
    }
    return 0;
}

// --- simulate / roc / sweep ----------------------------------------------------

loojam::LabeledCurve run_labeled(const loojam::TrialConfig& cfg,
                                 std::ostream* sink) {
    const auto records = loojam::run_monte_carlo(cfg, sink);
    loojam::LabeledCurve lc;
    lc.n = cfg.n;
    lc.snr_db = cfg.snr_db;
    lc.jsr_db = cfg.jsr_db;
    lc.trials = cfg.trials;
    lc.curve = loojam::compute_roc(records, cfg.tau_grid);
    return lc;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    const auto rc = loojam::load_run_config_file(config_path);
    std::filesystem::create_directories(out_dir);
    const auto trials_path = std::filesystem::path(out_dir) / "trials.csv";
    std::ofstream sink(trials_path, std::ios::binary);
    if (!sink) throw std::runtime_error("cannot write " + trials_path.string());
    loojam::run_monte_carlo(rc.trial, &sink);
    std::cout << "wrote " << trials_path.string() << '\n';
    return 0;
}

int cmd_roc(const std::string& config_path, const std::string& out_dir) {
    const auto rc = loojam::load_run_config_file(config_path);
    std::filesystem::create_directories(out_dir);
    const auto trials_path = std::filesystem::path(out_dir) / "trials.csv";
    std::ofstream sink(trials_path, std::ios::binary);
    if (!sink) throw std::runtime_error("cannot write " + trials_path.string());
    const auto records = loojam::run_monte_carlo(rc.trial, &sink);
    loojam::LabeledCurve lc;
    lc.n = rc.trial.n;
    lc.snr_db = rc.trial.snr_db;
    lc.jsr_db = rc.trial.jsr_db;
    lc.trials = rc.trial.trials;
    lc.curve = loojam::compute_roc(records, rc.trial.tau_grid);
    loojam::emit_outputs({lc}, out_dir);
    std::cout << "auc," << fmt(lc.curve.auc) << '\n'
              << "wrote " << (std::filesystem::path(out_dir) / "roc.csv").string()
              << '\n';
    return 0;
}

int cmd_sweep(const std::string& n_list, const std::string& config_path,
              const std::string& out_dir) {
    loojam::RunConfig rc;
    if (!config_path.empty()) {
        rc = loojam::load_run_config_file(config_path);
    } else {
        // Large lengths need the windowed scan to finish in minutes, and the
        // noise gate is calibrated for the 5 dB / large-n sweep regime.
        rc.trial.detector.scan = loojam::ScanPolicy::kWindowed;
        rc.trial.detector.gate_margin = 7.5;
    }

    std::vector<int> lengths;
    std::istringstream in(n_list);
    std::string item;
    while (std::getline(in, item, ',')) {
        const long v = std::strtol(item.c_str(), nullptr, 10);
        if (v < 2) throw std::runtime_error("bad fft length: '" + item + "'");
        lengths.push_back(static_cast<int>(v));
    }
    if (lengths.empty()) throw std::runtime_error("no fft lengths given");

    std::vector<loojam::LabeledCurve> curves;
    for (int n : lengths) {
        loojam::TrialConfig cfg = rc.trial;
        cfg.n = n;
        curves.push_back(run_labeled(cfg, nullptr));
        std::cout << "n," << n << ",auc," << fmt(curves.back().curve.auc)
                  << '\n';
    }
    loojam::emit_outputs(curves, out_dir);
    std::cout << "wrote " << (std::filesystem::path(out_dir) / "roc.csv").string()
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OFDM jamming: loss-of-orthogonality detection and correction"};
    app.require_subcommand(1);

    // grid
    auto* grid = app.add_subcommand("grid", "inspect the SSB resource grid");
    int dmrs_shift = 0;
    std::string grid_csv;
    bool grid_ascii = false;
    grid->add_option("--dmrs-shift", dmrs_shift, "DMRS comb offset (0..3)");
    grid->add_option("--csv", grid_csv, "write symbol,subcarrier,kind CSV ('-' = stdout)");
    grid->add_flag("--ascii", grid_ascii, "append an ASCII map to the summary");

    // synth
    auto* synth = app.add_subcommand("synth", "synthesize a (possibly attacked) symbol");
    int synth_n = 64;
    double synth_scs = 15e3;
    std::uint64_t synth_seed = 1;
    std::string synth_iq = "iq.bin";
    std::string synth_format = "bin";
    std::string synth_ref = "reference.csv";
    std::optional<int> synth_target;
    double synth_offset = 0.5;
    double synth_amp = 1.0;
    double synth_phase = 0.0;
    std::optional<double> synth_snr;
    std::uint64_t synth_noise_seed = 2;
    synth->add_option("--n", synth_n, "fft length")->check(CLI::PositiveNumber);
    synth->add_option("--scs", synth_scs, "subcarrier spacing in Hz");
    synth->add_option("--seed", synth_seed, "content seed");
    synth->add_option("--out", synth_iq, "IQ output path");
    synth->add_option("--format", synth_format, "bin or csv")
        ->check(CLI::IsMember({"bin", "csv"}));
    synth->add_option("--ref", synth_ref, "reference CSV output path ('' = skip)");
    synth->add_option("--attack-target", synth_target, "attacked subcarrier");
    synth->add_option("--attack-offset", synth_offset, "attack offset m");
    synth->add_option("--attack-amplitude", synth_amp, "attack amplitude");
    synth->add_option("--attack-phase", synth_phase, "attack phase, radians");
    synth->add_option("--snr", synth_snr, "add noise at this SNR in dB");
    synth->add_option("--noise-seed", synth_noise_seed, "noise seed");

    // detect
    auto* detect = app.add_subcommand("detect", "detect attacked subcarriers in an IQ capture");
    std::string detect_iq;
    double detect_scs = 15e3;
    std::string detect_ref;
    std::string detect_config;
    std::vector<int> detect_alt_n;
    bool detect_correct = false;
    std::string detect_out;
    detect->add_option("--iq", detect_iq, "IQ capture (binary or re,im CSV)")->required();
    detect->add_option("--scs", detect_scs, "subcarrier spacing for CSV captures");
    detect->add_option("--ref", detect_ref, "reference CSV (k,amplitude,phase)")->required();
    detect->add_option("--config", detect_config, "config file for detector/antijam settings");
    detect->add_option("--alt-n", detect_alt_n, "candidate fft lengths for the mismatch check");
    detect->add_flag("--correct", detect_correct, "apply the configured correction policy");
    detect->add_option("--out", detect_out, "report path (default stdout)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run one batch of seeded trials");
    std::string sim_config;
    std::string sim_out = ".";
    simulate->add_option("--config", sim_config, "config file")->required();
    simulate->add_option("--out", sim_out, "output directory");

    // roc
    auto* roc = app.add_subcommand("roc", "trials plus ROC curve and AUC");
    std::string roc_config;
    std::string roc_out;
    roc->add_option("--config", roc_config, "config file")->required();
    roc->add_option("--out", roc_out, "output directory")->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "ROC across several fft lengths");
    std::string sweep_n = "256,512,1024,2048";
    std::string sweep_config;
    std::string sweep_out = "sweep_out";
    sweep->add_option("--n", sweep_n, "comma-separated fft lengths");
    sweep->add_option("--config", sweep_config, "config file (default: 5 dB SNR, 0 dB JSR, 2000 trials, calibrated gate)");
    sweep->add_option("--out", sweep_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (grid->parsed()) return cmd_grid(dmrs_shift, grid_csv, grid_ascii);
        if (synth->parsed())
            return cmd_synth(synth_n, synth_scs, synth_seed, synth_iq,
                             synth_format, synth_ref, synth_target,
                             synth_offset, synth_amp, synth_phase, synth_snr,
                             synth_noise_seed);
        if (detect->parsed())
            return cmd_detect(detect_iq, detect_scs, detect_ref, detect_config,
                              detect_alt_n, detect_correct, detect_out);
        if (simulate->parsed()) return cmd_simulate(sim_config, sim_out);
        if (roc->parsed()) return cmd_roc(roc_config, roc_out);
        if (sweep->parsed()) return cmd_sweep(sweep_n, sweep_config, sweep_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
