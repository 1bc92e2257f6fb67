#pragma once

#include "apnc/channel.hpp"

#include <array>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace apnc {

/// Log-domain probability table over the joint symbol pair (a, b) seen in one
/// oversample window. Interior windows hold M x M entries in alphabet order;
/// the two chain-end windows see only one source, so the silent dimension
/// collapses to a single entry.
struct PairLogTable {
    int na = 0;
    int nb = 0;
    std::array<double, 16> logw{};

    int size() const { return na * nb; }
    void set_dims(int a, int b) { na = a; nb = b; }
    double& operator()(int ia, int ib) { return logw[size_t(ia * nb + ib)]; }
    double operator()(int ia, int ib) const { return logw[size_t(ia * nb + ib)]; }

    void fill_uniform() {
        const double v = -std::log(double(size()));
        for (int i = 0; i < size(); ++i) logw[size_t(i)] = v;
    }

    double max_log() const {
        double m = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < size(); ++i) m = std::max(m, logw[size_t(i)]);
        return m;
    }

    /// Subtract log(sum(exp)) so that exp(logw) sums to one.
    void normalize_log() {
        const double m = max_log();
        double s = 0.0;
        for (int i = 0; i < size(); ++i) s += std::exp(logw[size_t(i)] - m);
        const double lse = m + std::log(s);
        for (int i = 0; i < size(); ++i) logw[size_t(i)] -= lse;
    }

    void multiply_log(const PairLogTable& other) {
        assert(na == other.na && nb == other.nb);
        for (int i = 0; i < size(); ++i) logw[size_t(i)] += other.logw[size_t(i)];
    }

    bool all_finite() const {
        for (int i = 0; i < size(); ++i)
            if (!std::isfinite(logw[size_t(i)])) return false;
        return true;
    }
};

using EvidenceVector = PairLogTable;
using MessageVector = PairLogTable;

/// Per-window evidence: the normalized Gaussian likelihood of sample k over
/// the overlapping pair, log_weight(a,b) = -|y - (a + b e^{j phi})|^2 /
/// (2 sigma_k^2) up to normalization. Odd windows use sigma^2/delta, even
/// ones sigma^2/(1-delta); a zero-width window (delta = 0, odd k) is flat.
inline EvidenceVector compute_evidence(cplx y, int k, const ChannelParams& p) {
    if (k < 1 || k > p.sample_count())
        throw std::invalid_argument("sample index outside the packet");
    const Modulation& mod = p.modulation();
    const int m = mod.order();
    EvidenceVector t;
    t.set_dims(overlap_a(k) <= p.n_symbols ? m : 1, overlap_b(k) >= 1 ? m : 1);

    const NoiseModel nm = NoiseModel::from(p);
    const double s2 = nm.sample_sigma2(k);
    if (!std::isfinite(s2)) {
        t.fill_uniform();
        return t;
    }
    const double inv2s2 = 0.5 / std::max(s2, kSigma2Floor);
    const cplx rot = p.phase_rotation();
    for (int ia = 0; ia < t.na; ++ia) {
        for (int ib = 0; ib < t.nb; ++ib) {
            cplx mu = 0.0;
            if (t.na > 1) mu += mod.symbol(ia);
            if (t.nb > 1) mu += mod.symbol(ib) * rot;
            t(ia, ib) = -std::norm(y - mu) * inv2s2;
        }
    }
    t.normalize_log();
    return t;
}

inline void compute_all_evidence(const SampleVector& sv, std::vector<EvidenceVector>& ev) {
    const ChannelParams& p = sv.params;
    const Modulation& mod = p.modulation();
    const int m = mod.order();
    const int count = p.sample_count();
    const NoiseModel nm = NoiseModel::from(p);
    const cplx rot = p.phase_rotation();

    // interior windows share one mean table per parity
    std::array<cplx, 16> pair_means{};
    for (int ia = 0; ia < m; ++ia)
        for (int ib = 0; ib < m; ++ib)
            pair_means[size_t(ia * m + ib)] = mod.symbol(ia) + mod.symbol(ib) * rot;

    const bool odd_usable = std::isfinite(nm.odd_sigma2);
    const double inv_odd = odd_usable ? 0.5 / std::max(nm.odd_sigma2, kSigma2Floor) : 0.0;
    const double inv_even = 0.5 / std::max(nm.even_sigma2, kSigma2Floor);

    ev.resize(static_cast<size_t>(count));
    for (int k = 1; k <= count; ++k) {
        EvidenceVector& t = ev[size_t(k - 1)];
        if (k == 1 || k == count) {
            t = compute_evidence(sv.samples[size_t(k - 1)], k, p);
            continue;
        }
        t.set_dims(m, m);
        if (k % 2 != 0 && !odd_usable) {
            t.fill_uniform();
            continue;
        }
        const double inv2s2 = k % 2 != 0 ? inv_odd : inv_even;
        const cplx y = sv.samples[size_t(k - 1)];
        for (int i = 0; i < m * m; ++i)
            t.logw[size_t(i)] = -std::norm(y - pair_means[size_t(i)]) * inv2s2;
        t.normalize_log();
    }
}

inline std::vector<EvidenceVector> compute_all_evidence(const SampleVector& sv) {
    std::vector<EvidenceVector> ev;
    compute_all_evidence(sv, ev);
    return ev;
}

namespace detail {

/// Sum a node posterior over its non-shared coordinate and spread the result
/// across the next window's fresh coordinate. share_a picks which coordinate
/// the two adjacent windows have in common.
inline void collapse_message(const PairLogTable& post, bool share_a, PairLogTable& out) {
    const double mx = post.max_log();
    std::array<double, 4> marg{};
    double total = 0.0;
    if (share_a) {
        assert(post.na == out.na);
        for (int ia = 0; ia < post.na; ++ia)
            for (int ib = 0; ib < post.nb; ++ib)
                marg[size_t(ia)] += std::exp(post(ia, ib) - mx);
        for (int ia = 0; ia < post.na; ++ia) total += marg[size_t(ia)];
        const double scale = std::log(total * double(out.nb));
        for (int ia = 0; ia < out.na; ++ia) {
            const double lm = std::log(marg[size_t(ia)]) - scale;
            for (int ib = 0; ib < out.nb; ++ib) out(ia, ib) = lm;
        }
    } else {
        assert(post.nb == out.nb);
        for (int ia = 0; ia < post.na; ++ia)
            for (int ib = 0; ib < post.nb; ++ib)
                marg[size_t(ib)] += std::exp(post(ia, ib) - mx);
        for (int ib = 0; ib < post.nb; ++ib) total += marg[size_t(ib)];
        const double scale = std::log(total * double(out.na));
        for (int ib = 0; ib < out.nb; ++ib) {
            const double lm = std::log(marg[size_t(ib)]) - scale;
            for (int ia = 0; ia < out.na; ++ia) out(ia, ib) = lm;
        }
    }
}

}  // namespace detail

/// Right-bound sweep. Returns, per window, the message arriving from the
/// left: the posterior of that window's pair given all samples strictly to
/// its left (uniform into the first window). Adjacent windows share A's
/// symbol when the left window index is odd and B's when it is even.
inline void forward_pass(const std::vector<EvidenceVector>& evidence,
                         std::vector<MessageVector>& into) {
    const int count = int(evidence.size());
    into.resize(static_cast<size_t>(count));
    into[0].set_dims(evidence[0].na, evidence[0].nb);
    into[0].fill_uniform();
    PairLogTable post;
    for (int i = 0; i + 1 < count; ++i) {
        post = evidence[size_t(i)];
        post.multiply_log(into[size_t(i)]);
        into[size_t(i + 1)].set_dims(evidence[size_t(i + 1)].na, evidence[size_t(i + 1)].nb);
        detail::collapse_message(post, /*share_a=*/i % 2 == 0, into[size_t(i + 1)]);
    }
}

inline std::vector<MessageVector> forward_pass(const std::vector<EvidenceVector>& evidence) {
    std::vector<MessageVector> into;
    forward_pass(evidence, into);
    return into;
}

/// Left-bound sweep, the mirror image of forward_pass: per window, the
/// message arriving from the right (uniform into the last window).
inline void backward_pass(const std::vector<EvidenceVector>& evidence,
                          std::vector<MessageVector>& into) {
    const int count = int(evidence.size());
    into.resize(static_cast<size_t>(count));
    into[size_t(count - 1)].set_dims(evidence[size_t(count - 1)].na, evidence[size_t(count - 1)].nb);
    into[size_t(count - 1)].fill_uniform();
    PairLogTable post;
    for (int i = count - 1; i > 0; --i) {
        post = evidence[size_t(i)];
        post.multiply_log(into[size_t(i)]);
        into[size_t(i - 1)].set_dims(evidence[size_t(i - 1)].na, evidence[size_t(i - 1)].nb);
        detail::collapse_message(post, /*share_a=*/i % 2 == 1, into[size_t(i - 1)]);
    }
}

inline std::vector<MessageVector> backward_pass(const std::vector<EvidenceVector>& evidence) {
    std::vector<MessageVector> into;
    backward_pass(evidence, into);
    return into;
}

/// Posterior at one even window 2n: the joint distribution of
/// (x_A[n], x_B[n]) given the whole packet, plus its XOR marginal.
struct Belief {
    PairLogTable joint;
    std::array<double, 4> xor_posterior{};
};

/// Combine evidence with both message sweeps at the N even windows. The
/// chain graph is a tree, so these are the exact per-symbol posteriors.
inline void beliefs(const std::vector<EvidenceVector>& evidence,
                    const std::vector<MessageVector>& fwd,
                    const std::vector<MessageVector>& bwd, const Modulation& mod,
                    std::vector<Belief>& out) {
    const int n = (int(evidence.size()) - 1) / 2;
    const int m = mod.order();
    out.resize(static_cast<size_t>(n));
    for (int sym = 1; sym <= n; ++sym) {
        const size_t i = size_t(2 * sym - 1);  // 0-based index of window 2*sym
        Belief& b = out[size_t(sym - 1)];
        b.joint = evidence[i];
        b.joint.multiply_log(fwd[i]);
        b.joint.multiply_log(bwd[i]);
        // single exp sweep serves both the normalization and the coset sums
        const double mx = b.joint.max_log();
        std::array<double, 16> prob{};
        double total = 0.0;
        for (int e = 0; e < m * m; ++e) {
            prob[size_t(e)] = std::exp(b.joint.logw[size_t(e)] - mx);
            total += prob[size_t(e)];
        }
        const double lse = mx + std::log(total);
        for (int e = 0; e < m * m; ++e) b.joint.logw[size_t(e)] -= lse;
        b.xor_posterior.fill(0.0);
        for (int ia = 0; ia < m; ++ia)
            for (int ib = 0; ib < m; ++ib)
                b.xor_posterior[size_t(mod.xor_index(ia, ib))] += prob[size_t(ia * m + ib)] / total;
    }
}

inline std::vector<Belief> beliefs(const std::vector<EvidenceVector>& evidence,
                                   const std::vector<MessageVector>& fwd,
                                   const std::vector<MessageVector>& bwd,
                                   const Modulation& mod) {
    std::vector<Belief> out;
    beliefs(evidence, fwd, bwd, mod, out);
    return out;
}

/// MAP XOR symbol per position: argmax over the coset sums, lowest alphabet
/// index on exact ties.
inline std::vector<int> decode_xor(const std::vector<Belief>& bel, const Modulation& mod) {
    std::vector<int> out(bel.size());
    for (size_t i = 0; i < bel.size(); ++i) {
        int best = 0;
        for (int c = 1; c < mod.order(); ++c)
            if (bel[i].xor_posterior[size_t(c)] > bel[i].xor_posterior[size_t(best)]) best = c;
        out[i] = best;
    }
    return out;
}

struct DecodeResult {
    std::vector<int> xor_indices;                       // alphabet index per symbol
    std::vector<std::array<double, 4>> xor_posteriors;  // P(x_A xor x_B | Y) per symbol
};

/// Reusable decode buffers; a Monte-Carlo loop keeps one per thread so packet
/// after packet runs without reallocating the message tables.
struct DecodeWorkspace {
    std::vector<EvidenceVector> evidence;
    std::vector<MessageVector> fwd;
    std::vector<MessageVector> bwd;
    std::vector<Belief> bel;
};

/// Full relay decode of one packet: evidence, one right-bound and one
/// left-bound sweep (the tree needs no iteration), per-symbol posteriors,
/// and the MAP XOR packet.
inline DecodeResult decode_packet(const SampleVector& sv, DecodeWorkspace& ws) {
    compute_all_evidence(sv, ws.evidence);
    forward_pass(ws.evidence, ws.fwd);
    backward_pass(ws.evidence, ws.bwd);
    const Modulation& mod = sv.params.modulation();
    beliefs(ws.evidence, ws.fwd, ws.bwd, mod, ws.bel);
    DecodeResult res;
    res.xor_indices = decode_xor(ws.bel, mod);
    res.xor_posteriors.resize(ws.bel.size());
    for (size_t i = 0; i < ws.bel.size(); ++i) res.xor_posteriors[i] = ws.bel[i].xor_posterior;
    return res;
}

inline DecodeResult decode_packet(const SampleVector& sv) {
    DecodeWorkspace ws;
    return decode_packet(sv, ws);
}

}  // namespace apnc
