#pragma once

#include "apnc/bp_decoder.hpp"
#include "apnc/oracle.hpp"

#include <array>
#include <cstdint>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

namespace apnc {

/// Randomized cross-check of the message-passing decoder against the
/// enumeration oracle, covering the four offset cases (aligned/offset symbols
/// x in-phase/offset carrier) for every packet length up to max_n.
struct VerifyOptions {
    int max_n = 5;
    int trials_per_case = 200;  // instances per (scheme, offset case, packet length)
    std::uint64_t seed = 1;
    std::vector<double> ebn0_dbs{0.0, 6.0, 12.0};
    int threads = 0;
    /// Test hook: negate the evidence log-weights (the sign typo the decoder
    /// must not have); the report is then expected to fail loudly.
    bool inject_evidence_sign_fault = false;
};

struct VerifyWorst {
    double deviation = 0.0;
    ModKind scheme = ModKind::bpsk;
    int n_symbols = 0;
    double delta = 0.0;
    double phi = 0.0;
    double ebn0_db = 0.0;
    std::uint64_t trial_seed = 0;
};

struct VerifyCaseReport {
    bool delta_nonzero = false;
    bool phi_nonzero = false;
    int trials = 0;
    VerifyWorst worst;
};

struct VerifyReport {
    std::vector<VerifyCaseReport> cases;
    VerifyWorst worst;
    int total_trials = 0;

    static constexpr double kTolerance = 1e-9;
    bool pass() const { return worst.deviation <= kTolerance; }
};

namespace detail {

inline double compare_one_instance(ModKind scheme, int n, double delta, double phi, double ebn0,
                                   std::uint64_t trial_seed, bool inject_fault) {
    const ChannelParams params(scheme, n, delta, phi, ebn0);
    const Modulation& mod = params.modulation();
    SplitRng rng(trial_seed);
    std::vector<int> ia(static_cast<size_t>(n)), ib(static_cast<size_t>(n));
    for (int& v : ia) v = int(rng.next_u64() % std::uint64_t(mod.order()));
    for (int& v : ib) v = int(rng.next_u64() % std::uint64_t(mod.order()));
    const SampleVector y =
        transmit(indices_to_symbols(ia, mod), indices_to_symbols(ib, mod), params, rng);

    std::vector<EvidenceVector> ev = compute_all_evidence(y);
    if (inject_fault) {
        for (EvidenceVector& e : ev) {
            for (int i = 0; i < e.size(); ++i) e.logw[size_t(i)] = -e.logw[size_t(i)];
            e.normalize_log();
        }
    }
    const std::vector<Belief> bel = beliefs(ev, forward_pass(ev), backward_pass(ev), mod);
    const BruteForcePosterior oracle = brute_force_posterior(y);

    const int m = mod.order();
    double dev = 0.0;
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                dev = std::max(dev, std::abs(std::exp(bel[size_t(i)].joint(a, b)) -
                                             oracle.joint[size_t(i)][size_t(a * m + b)]));
    return dev;
}

}  // namespace detail

inline VerifyReport verify_exactness(const VerifyOptions& opt) {
    if (opt.max_n < 1 || opt.max_n > 6)
        throw std::invalid_argument("max_n must lie in [1, 6] (enumeration cost)");
    if (opt.trials_per_case < 1) throw std::invalid_argument("trials must be positive");
    if (opt.ebn0_dbs.empty()) throw std::invalid_argument("need at least one Eb/N0 value");

    const int nthreads = [&] {
        if (opt.threads > 0) return opt.threads;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? int(hw) : 1;
    }();

    VerifyReport report;
    int case_index = 0;
    for (int dcase = 0; dcase < 2; ++dcase) {
        for (int pcase = 0; pcase < 2; ++pcase) {
            VerifyCaseReport cr;
            cr.delta_nonzero = dcase == 1;
            cr.phi_nonzero = pcase == 1;

            struct Trial {
                ModKind scheme;
                int n;
                double delta, phi, ebn0;
                std::uint64_t seed;
            };
            std::vector<Trial> trials;
            for (ModKind scheme : {ModKind::bpsk, ModKind::qpsk}) {
                for (int n = 1; n <= opt.max_n; ++n) {
                    for (int t = 0; t < opt.trials_per_case; ++t) {
                        Trial tr;
                        tr.scheme = scheme;
                        tr.n = n;
                        tr.seed = SplitRng::stream(opt.seed, std::uint64_t(case_index),
                                                   std::uint64_t(t * 64 + n * 8 +
                                                                 (scheme == ModKind::qpsk)))
                                      .next_u64();
                        SplitRng prng(tr.seed);
                        tr.delta = cr.delta_nonzero ? 1e-6 + (1.0 - 2e-6) * prng.next_unit() : 0.0;
                        tr.phi = cr.phi_nonzero
                                     ? 1e-6 + (2.0 * std::numbers::pi - 2e-6) * prng.next_unit()
                                     : 0.0;
                        tr.ebn0 = opt.ebn0_dbs[size_t(t) % opt.ebn0_dbs.size()];
                        trials.push_back(tr);
                    }
                }
            }

            std::vector<VerifyWorst> partial(static_cast<size_t>(nthreads));
            std::vector<std::thread> workers;
            const int total = int(trials.size());
            for (int w = 0; w < nthreads; ++w) {
                workers.emplace_back([&, w] {
                    VerifyWorst worst;
                    worst.deviation = -1.0;
                    // strided pickup keeps the expensive long-packet trials spread out
                    for (int t = w; t < total; t += nthreads) {
                        const Trial& tr = trials[size_t(t)];
                        const double dev = detail::compare_one_instance(
                            tr.scheme, tr.n, tr.delta, tr.phi, tr.ebn0, tr.seed,
                            opt.inject_evidence_sign_fault);
                        if (dev > worst.deviation) {
                            worst.deviation = dev;
                            worst.scheme = tr.scheme;
                            worst.n_symbols = tr.n;
                            worst.delta = tr.delta;
                            worst.phi = tr.phi;
                            worst.ebn0_db = tr.ebn0;
                            worst.trial_seed = tr.seed;
                        }
                    }
                    partial[size_t(w)] = worst;
                });
            }
            for (auto& w : workers) w.join();

            cr.trials = total;
            cr.worst.deviation = -1.0;
            for (const VerifyWorst& w : partial)
                if (w.deviation > cr.worst.deviation) cr.worst = w;
            report.total_trials += cr.trials;
            if (cr.worst.deviation > report.worst.deviation || report.cases.empty())
                report.worst = cr.worst;
            report.cases.push_back(cr);
            ++case_index;
        }
    }
    return report;
}

}  // namespace apnc
