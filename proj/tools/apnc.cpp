// apnc - asynchronous physical-layer network coding relay simulator.
//
// Subcommands:
//   simulate  Monte-Carlo BER sweep over (delta, phi, Eb/N0); CSV and SVG out
//   decode    decode one received-packet trace (JSON) to XOR symbols
//   verify    randomized decoder-vs-enumeration exactness check
//   penalty   dB penalty between two measured BER curves at a target BER
//
// Exit codes: 0 success, 1 validation error, 2 verification failure.

#include "CLI11.hpp"
#include "json.hpp"

#include "apnc/ber_csv.hpp"
#include "apnc/harness.hpp"
#include "apnc/parse.hpp"
#include "apnc/svg_plot.hpp"
#include "apnc/trace.hpp"
#include "apnc/verify.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;

struct SimulateOptions {
    std::string scheme = "bpsk";
    std::string deltas = "0";
    std::string phis = "0";
    std::string ebn0 = "0:2:12";
    int packets = 10000;
    int bits = 2048;
    std::uint64_t seed = 1;
    std::string decoder = "bp";
    int threads = 0;
    std::string output = "-";
    std::string svg;
    std::string config;
};

// Flags override config-file keys, which override the built-in defaults.
void apply_config_file(const CLI::App& cmd, SimulateOptions& opt) {
    if (opt.config.empty()) return;
    std::ifstream in(opt.config);
    if (!in) throw std::invalid_argument("cannot open config file: " + opt.config);
    json cfg = json::parse(in);

    const auto take_string = [&](const char* key, const std::string& flag, std::string& dst) {
        if (cfg.contains(key) && cmd.get_option(flag)->count() == 0) {
            if (cfg[key].is_number()) {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", cfg[key].get<double>());
                dst = buf;
            } else {
                dst = cfg[key].get<std::string>();
            }
        }
    };
    const auto take_int = [&](const char* key, const std::string& flag, auto& dst) {
        if (cfg.contains(key) && cmd.get_option(flag)->count() == 0)
            dst = cfg[key].get<std::decay_t<decltype(dst)>>();
    };
    take_string("scheme", "--scheme", opt.scheme);
    take_string("delta", "--delta", opt.deltas);
    take_string("phi", "--phi", opt.phis);
    take_string("ebn0", "--ebn0", opt.ebn0);
    take_int("packets", "--packets", opt.packets);
    take_int("bits", "--bits", opt.bits);
    take_int("seed", "--seed", opt.seed);
    take_string("decoder", "--decoder", opt.decoder);
    take_int("threads", "--threads", opt.threads);
    take_string("output", "--output", opt.output);
    take_string("svg", "--svg", opt.svg);
}

int run_simulate(const CLI::App& cmd, SimulateOptions& opt) {
    apply_config_file(cmd, opt);

    apnc::SweepConfig cfg;
    cfg.scheme = apnc::mod_kind_from_string(opt.scheme);
    cfg.deltas = apnc::parse_list(opt.deltas, apnc::parse_fraction);
    cfg.phis = apnc::parse_list(opt.phis, apnc::parse_angle);
    cfg.ebn0_dbs = apnc::parse_ebn0_grid(opt.ebn0);
    cfg.packets = opt.packets;
    cfg.bits_per_packet = opt.bits;
    cfg.base_seed = opt.seed;
    cfg.decoder = apnc::decoder_from_string(opt.decoder);
    cfg.threads = opt.threads;
    if (cfg.packets < 1) throw std::invalid_argument("--packets must be at least 1");
    for (double d : cfg.deltas)
        (void)apnc::ChannelParams(cfg.scheme, 1, d, 0.0, 0.0);  // validate early

    const std::vector<apnc::BerRecord> records = apnc::sweep(cfg);

    if (opt.output == "-") {
        apnc::write_ber_csv(std::cout, records);
    } else {
        std::ofstream out(opt.output, std::ios::binary);
        if (!out) throw std::invalid_argument("cannot open output file: " + opt.output);
        apnc::write_ber_csv(out, records);
    }
    if (!opt.svg.empty()) {
        std::ofstream out(opt.svg, std::ios::binary);
        if (!out) throw std::invalid_argument("cannot open SVG file: " + opt.svg);
        out << apnc::render_ber_svg(records);
    }
    return 0;
}

struct VerifyCliOptions {
    int max_n = 5;
    int trials = 200;
    std::uint64_t seed = 1;
    std::string ebn0 = "0,6,12";
    int threads = 0;
    bool inject_fault = false;
};

int run_verify(const VerifyCliOptions& vo) {
    apnc::VerifyOptions opt;
    opt.max_n = vo.max_n;
    opt.trials_per_case = vo.trials;
    opt.seed = vo.seed;
    opt.ebn0_dbs = apnc::parse_ebn0_grid(vo.ebn0);
    opt.threads = vo.threads;
    opt.inject_evidence_sign_fault = vo.inject_fault;

    const apnc::VerifyReport report = apnc::verify_exactness(opt);
    for (const apnc::VerifyCaseReport& c : report.cases) {
        std::printf("case delta%s phi%s: %d trials, worst |bp - enum| = %.3e\n",
                    c.delta_nonzero ? "!=0" : "=0", c.phi_nonzero ? "!=0" : "=0", c.trials,
                    c.worst.deviation);
    }
    const apnc::VerifyWorst& w = report.worst;
    std::printf("worst overall: %.3e (%s N=%d delta=%.9g phi=%.9g ebn0=%g dB trial_seed=%llu)\n",
                w.deviation, apnc::to_string(w.scheme), w.n_symbols, w.delta, w.phi, w.ebn0_db,
                static_cast<unsigned long long>(w.trial_seed));
    if (!report.pass()) {
        std::printf("FAIL: deviation above %.1e\n", apnc::VerifyReport::kTolerance);
        return 2;
    }
    std::printf("PASS: all %d trials within %.1e\n", report.total_trials,
                apnc::VerifyReport::kTolerance);
    return 0;
}

struct DecodeOptions {
    std::string trace;
    std::string output = "-";
};

int run_decode(const DecodeOptions& dopt) {
    std::ifstream in(dopt.trace);
    if (!in) throw std::invalid_argument("cannot open trace file: " + dopt.trace);
    const apnc::SampleVector sv = apnc::read_trace(in);
    const apnc::DecodeResult res = apnc::decode_packet(sv);
    const apnc::Modulation& mod = sv.params.modulation();

    std::ostringstream os;
    os << "# schema=1\n";
    os << "symbol,xor_bits,xor_re,xor_im";
    for (int c = 0; c < mod.order(); ++c) os << ",p" << c;
    os << "\n";
    char buf[40];
    for (int n = 0; n < sv.params.n_symbols; ++n) {
        const int idx = res.xor_indices[size_t(n)];
        os << (n + 1) << ',';
        for (int j = 0; j < mod.bits_per_symbol(); ++j)
            os << ((mod.label(idx) >> (mod.bits_per_symbol() - 1 - j)) & 1u);
        std::snprintf(buf, sizeof buf, ",%.17g", mod.symbol(idx).real());
        os << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", mod.symbol(idx).imag());
        os << buf;
        for (int c = 0; c < mod.order(); ++c) {
            std::snprintf(buf, sizeof buf, ",%.17g", res.xor_posteriors[size_t(n)][size_t(c)]);
            os << buf;
        }
        os << "\n";
    }
    if (dopt.output == "-") {
        std::cout << os.str();
    } else {
        std::ofstream out(dopt.output, std::ios::binary);
        if (!out) throw std::invalid_argument("cannot open output file: " + dopt.output);
        out << os.str();
    }
    return 0;
}

struct PenaltyOptions {
    std::string ref_csv;
    std::string test_csv;
    double target = 1e-3;
};

std::vector<apnc::BerRecord> load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open CSV file: " + path);
    return apnc::read_ber_csv(in);
}

int run_penalty(const PenaltyOptions& po) {
    const auto ref_curves = apnc::group_curves(load_csv(po.ref_csv));
    const auto test_curves = apnc::group_curves(load_csv(po.test_csv));
    if (ref_curves.size() != 1)
        throw std::invalid_argument("reference CSV must contain exactly one (scheme, delta, phi) curve");
    const auto& ref = ref_curves.front();

    std::printf("reference: %s (%zu points)\n", apnc::curve_label(ref.front()).c_str(),
                ref.size());
    std::vector<double> targets{po.target};
    if (po.target != 1e-4) targets.push_back(1e-4);  // always report the deeper point too
    for (size_t ti = 0; ti < targets.size(); ++ti) {
        const double target = targets[ti];
        const bool is_main = ti == 0;
        std::printf("%s BER %.3g:\n", is_main ? "target" : "also at", target);
        std::vector<double> snrs;
        for (const auto& test : test_curves) {
            try {
                const apnc::Penalty p = apnc::penalty_db(ref, test, target);
                std::printf("  %s: penalty %+.3f +/- %.3f dB (ref %.3f dB, test %.3f dB)\n",
                            apnc::curve_label(test.front()).c_str(), p.db, p.stderr_db,
                            p.ref_snr_db, p.test_snr_db);
                snrs.push_back(p.test_snr_db);
            } catch (const std::out_of_range& e) {
                if (is_main) throw;
                std::printf("  %s: n/a (%s)\n", apnc::curve_label(test.front()).c_str(), e.what());
            }
        }
        if (snrs.size() > 1) {
            const auto [mn, mx] = std::minmax_element(snrs.begin(), snrs.end());
            std::printf("  spread across %zu curves: %.3f dB\n", snrs.size(), *mx - *mn);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"asynchronous physical-layer network coding relay simulator"};
    app.require_subcommand(1);

    SimulateOptions so;
    CLI::App* sim = app.add_subcommand("simulate", "run a Monte-Carlo BER sweep");
    sim->add_option("--scheme", so.scheme, "modulation: bpsk or qpsk");
    sim->add_option("--delta", so.deltas,
                    "symbol offsets, comma list; fractions allowed (e.g. 0,1/2)");
    sim->add_option("--phi", so.phis,
                    "phase offsets, comma list; multiples of pi allowed (e.g. 0,pi/8,pi/4)");
    sim->add_option("--ebn0", so.ebn0, "Eb/N0 grid in dB: start:step:stop or comma list");
    sim->add_option("--packets", so.packets, "packets per point");
    sim->add_option("--bits", so.bits, "bits per packet");
    sim->add_option("--seed", so.seed, "base seed for the sweep");
    sim->add_option("--decoder", so.decoder, "bp or sync (aligned BPSK baseline)");
    sim->add_option("--threads", so.threads, "worker threads (0 = all cores)")
        ->envname("APNC_THREADS");
    sim->add_option("-o,--output", so.output, "output CSV path ('-' = stdout)");
    sim->add_option("--svg", so.svg, "also render the curves to this SVG file");
    sim->add_option("--config", so.config, "JSON config file (flags take precedence)");

    VerifyCliOptions vo;
    CLI::App* ver = app.add_subcommand("verify", "check the decoder against enumeration");
    ver->add_option("--max-n", vo.max_n, "largest packet length in symbols (<= 6)");
    ver->add_option("--trials", vo.trials, "instances per (scheme, case, length)");
    ver->add_option("--seed", vo.seed, "base seed");
    ver->add_option("--ebn0", vo.ebn0, "Eb/N0 values cycled over trials");
    ver->add_option("--threads", vo.threads, "worker threads (0 = all cores)")
        ->envname("APNC_THREADS");
    ver->add_flag("--inject-fault", vo.inject_fault,
                  "flip the evidence sign to prove the check fails loudly");

    DecodeOptions dopt;
    CLI::App* dec = app.add_subcommand("decode", "decode a received-packet trace (JSON)");
    dec->add_option("trace", dopt.trace, "trace file produced by write_trace / external tools")
        ->required();
    dec->add_option("-o,--output", dopt.output, "output CSV path ('-' = stdout)");

    PenaltyOptions po;
    CLI::App* pen = app.add_subcommand("penalty", "dB penalty between two BER curves");
    pen->add_option("ref", po.ref_csv, "reference curve CSV")->required();
    pen->add_option("test", po.test_csv, "test curve(s) CSV")->required();
    pen->add_option("--target", po.target, "target BER (default 1e-3)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 1;
    }

    try {
        if (sim->parsed()) return run_simulate(*sim, so);
        if (dec->parsed()) return run_decode(dopt);
        if (ver->parsed()) return run_verify(vo);
        if (pen->parsed()) return run_penalty(po);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
