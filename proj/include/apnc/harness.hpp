#pragma once

#include "apnc/bp_decoder.hpp"
#include "apnc/oracle.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace apnc {

enum class DecoderKind { bp, sync_baseline };

inline const char* to_string(DecoderKind d) {
    return d == DecoderKind::bp ? "bp" : "sync";
}

inline DecoderKind decoder_from_string(const std::string& s) {
    if (s == "bp") return DecoderKind::bp;
    if (s == "sync" || s == "sync_baseline") return DecoderKind::sync_baseline;
    throw std::invalid_argument("unknown decoder: " + s);
}

/// One Monte-Carlo operating point.
struct PointConfig {
    ModKind scheme = ModKind::bpsk;
    double delta = 0.0;
    double phi = 0.0;
    double ebn0_db = 0.0;
    int bits_per_packet = 2048;
    DecoderKind decoder = DecoderKind::bp;
};

/// One Monte-Carlo data point: configuration, trial volume, measured relay
/// XOR bit error rate and its binomial standard error.
struct BerRecord {
    ModKind scheme = ModKind::bpsk;
    double delta = 0.0;
    double phi = 0.0;
    double ebn0_db = 0.0;
    std::int64_t trials_bits = 0;
    std::int64_t bit_errors = 0;
    double ber = 0.0;
    double std_err = 0.0;
};

struct SweepConfig {
    ModKind scheme = ModKind::bpsk;
    std::vector<double> deltas{0.0};
    std::vector<double> phis{0.0};
    std::vector<double> ebn0_dbs{0.0};
    int packets = 10000;
    int bits_per_packet = 2048;
    std::uint64_t base_seed = 1;
    DecoderKind decoder = DecoderKind::bp;
    int threads = 0;  // 0 = hardware concurrency
};

namespace detail {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

struct PacketTally {
    std::int64_t bits = 0;
    std::int64_t errors = 0;
};

/// Generate, transmit and decode one packet; returns the bit-error tally of
/// the relay XOR decision against the true XOR symbols.
inline PacketTally run_packet(const PointConfig& pc, const ChannelParams& params,
                              std::uint64_t point_seed, std::int64_t packet_index,
                              DecodeWorkspace& ws) {
    const Modulation& mod = params.modulation();
    SplitRng rng = SplitRng::stream(point_seed, std::uint64_t(packet_index));

    std::vector<int> bits_a(size_t(pc.bits_per_packet));
    std::vector<int> bits_b(size_t(pc.bits_per_packet));
    for (int& b : bits_a) b = rng.next_bit();
    for (int& b : bits_b) b = rng.next_bit();
    const std::vector<int> idx_a = pack_bits_to_indices(bits_a, mod);
    const std::vector<int> idx_b = pack_bits_to_indices(bits_b, mod);
    const std::vector<cplx> xa = indices_to_symbols(idx_a, mod);
    const std::vector<cplx> xb = indices_to_symbols(idx_b, mod);

    const SampleVector sv = transmit(xa, xb, params, rng);

    std::vector<int> decoded;
    if (pc.decoder == DecoderKind::bp) {
        decoded = decode_packet(sv, ws).xor_indices;
    } else {
        const NoiseModel nm = NoiseModel::from(params);
        decoded.resize(size_t(params.n_symbols));
        for (int n = 1; n <= params.n_symbols; ++n) {
            const int d = sync_bpsk_decide(sv.samples[size_t(2 * n - 1)], nm.even_sigma2);
            decoded[size_t(n - 1)] = d > 0 ? 0 : 1;
        }
    }

    PacketTally tally;
    tally.bits = pc.bits_per_packet;
    for (int n = 0; n < params.n_symbols; ++n) {
        const int truth = mod.xor_index(idx_a[size_t(n)], idx_b[size_t(n)]);
        tally.errors += mod.bit_distance(decoded[size_t(n)], truth);
    }
    return tally;
}

}  // namespace detail

/// Estimate the relay XOR BER at one operating point over `packets` packets.
/// Each packet draws from its own (seed, packet index) stream, so the result
/// is independent of thread count and identical for identical seeds.
inline BerRecord run_point(const PointConfig& pc, int packets, std::uint64_t seed,
                           int threads = 0) {
    if (packets < 1) throw std::invalid_argument("packet count must be at least 1");
    const Modulation& mod = Modulation::get(pc.scheme);
    if (pc.bits_per_packet < 1 || pc.bits_per_packet % mod.bits_per_symbol() != 0)
        throw std::invalid_argument("bits per packet must be a positive multiple of bits per symbol");
    if (pc.decoder == DecoderKind::sync_baseline &&
        (pc.scheme != ModKind::bpsk || pc.delta != 0.0 || pc.phi != 0.0))
        throw std::invalid_argument("sync baseline decoder requires BPSK with delta = 0 and phi = 0");

    const ChannelParams params(pc.scheme, pc.bits_per_packet / mod.bits_per_symbol(), pc.delta,
                               pc.phi, pc.ebn0_db);

    const int nthreads = std::min(detail::resolve_threads(threads), packets);
    std::vector<detail::PacketTally> partial(static_cast<size_t>(nthreads));
    std::vector<std::thread> workers;
    workers.reserve(static_cast<size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
        const std::int64_t lo = std::int64_t(packets) * t / nthreads;
        const std::int64_t hi = std::int64_t(packets) * (t + 1) / nthreads;
        workers.emplace_back([&, t, lo, hi] {
            detail::PacketTally acc;
            DecodeWorkspace ws;
            for (std::int64_t pkt = lo; pkt < hi; ++pkt) {
                const detail::PacketTally one = detail::run_packet(pc, params, seed, pkt, ws);
                acc.bits += one.bits;
                acc.errors += one.errors;
            }
            partial[size_t(t)] = acc;
        });
    }
    for (auto& w : workers) w.join();

    BerRecord rec;
    rec.scheme = pc.scheme;
    rec.delta = params.delta;
    rec.phi = params.phi;
    rec.ebn0_db = pc.ebn0_db;
    for (const auto& p : partial) {
        rec.trials_bits += p.bits;
        rec.bit_errors += p.errors;
    }
    rec.ber = double(rec.bit_errors) / double(rec.trials_bits);
    rec.std_err = std::sqrt(rec.ber * (1.0 - rec.ber) / double(rec.trials_bits));
    return rec;
}

inline std::uint64_t derive_point_seed(std::uint64_t base_seed, std::uint64_t point_index) {
    return mix64(base_seed ^ mix64(point_index + 0x9216d5d98979fb1bULL));
}

/// Run every (delta, phi, ebn0) combination of the grid, deltas outermost and
/// Eb/N0 innermost. Point seeds derive from (base_seed, flat point index), so
/// the sweep is reproducible regardless of scheduling.
inline std::vector<BerRecord> sweep(const SweepConfig& cfg) {
    if (cfg.deltas.empty() || cfg.phis.empty() || cfg.ebn0_dbs.empty())
        throw std::invalid_argument("sweep grid must not be empty");
    std::vector<BerRecord> records;
    records.reserve(cfg.deltas.size() * cfg.phis.size() * cfg.ebn0_dbs.size());
    std::uint64_t point_index = 0;
    for (double delta : cfg.deltas) {
        for (double phi : cfg.phis) {
            for (double ebn0 : cfg.ebn0_dbs) {
                PointConfig pc;
                pc.scheme = cfg.scheme;
                pc.delta = delta;
                pc.phi = phi;
                pc.ebn0_db = ebn0;
                pc.bits_per_packet = cfg.bits_per_packet;
                pc.decoder = cfg.decoder;
                records.push_back(run_point(pc, cfg.packets,
                                            derive_point_seed(cfg.base_seed, point_index),
                                            cfg.threads));
                ++point_index;
            }
        }
    }
    return records;
}

struct CurvePoint {
    double snr_db = 0.0;
    double stderr_db = 0.0;
};

inline std::string curve_label(const BerRecord& r) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s delta=%.6g phi=%.6g", to_string(r.scheme), r.delta, r.phi);
    return buf;
}

/// Eb/N0 at which a BER curve crosses target_ber, by interpolating Eb/N0
/// linearly in log10(BER) between the bracketing grid points. The returned
/// stderr propagates the binomial uncertainty of the two bracketing points.
inline CurvePoint snr_at_ber(std::span<const BerRecord> curve, double target_ber) {
    if (curve.size() < 2)
        throw std::out_of_range("curve needs at least two points to interpolate");
    if (!(target_ber > 0.0 && target_ber < 1.0))
        throw std::invalid_argument("target BER must lie in (0, 1)");
    for (size_t i = 0; i + 1 < curve.size(); ++i) {
        const BerRecord& a = curve[i];
        const BerRecord& b = curve[i + 1];
        if (!(a.ebn0_db < b.ebn0_db))
            throw std::invalid_argument("curve must be sorted by increasing Eb/N0");
        if (a.ber >= target_ber && b.ber < target_ber && b.ber > 0.0) {
            const double l1 = std::log10(a.ber);
            const double l2 = std::log10(b.ber);
            const double lt = std::log10(target_ber);
            const double span_db = b.ebn0_db - a.ebn0_db;
            const double snr = a.ebn0_db + span_db * (l1 - lt) / (l1 - l2);
            // d(snr)/d(log10 ber_i), then through d(log10 b)/db = 1/(b ln10)
            const double denom = (l1 - l2) * (l1 - l2);
            const double dl1 = span_db * (lt - l2) / denom;
            const double dl2 = span_db * (l1 - lt) / denom;
            const double ln10 = std::log(10.0);
            const double s1 = dl1 * a.std_err / (a.ber * ln10);
            const double s2 = dl2 * b.std_err / (b.ber * ln10);
            return {snr, std::sqrt(s1 * s1 + s2 * s2)};
        }
    }
    throw std::out_of_range("curve " + curve_label(curve.front()) + " does not bracket BER " +
                            std::to_string(target_ber));
}

struct Penalty {
    double db = 0.0;
    double stderr_db = 0.0;
    double ref_snr_db = 0.0;
    double test_snr_db = 0.0;
};

/// Extra Eb/N0 (dB) the test curve needs to reach target_ber relative to the
/// reference curve.
inline Penalty penalty_db(std::span<const BerRecord> reference, std::span<const BerRecord> test,
                          double target_ber) {
    const CurvePoint r = snr_at_ber(reference, target_ber);
    const CurvePoint t = snr_at_ber(test, target_ber);
    Penalty p;
    p.ref_snr_db = r.snr_db;
    p.test_snr_db = t.snr_db;
    p.db = t.snr_db - r.snr_db;
    p.stderr_db = std::sqrt(r.stderr_db * r.stderr_db + t.stderr_db * t.stderr_db);
    return p;
}

}  // namespace apnc
