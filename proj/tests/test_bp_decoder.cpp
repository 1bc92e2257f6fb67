#include "doctest.h"

#include "apnc/bp_decoder.hpp"
#include "apnc/oracle.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

using namespace apnc;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kPi = std::numbers::pi;

// ---- test-side enumeration oracle ------------------------------------------
// Per-sample log-likelihood tables computed from the channel definition, then
// conditional pair marginals P(pair at window w | y[1..j]) by summing over
// every packet pair. Deliberately brute force.

std::vector<std::array<double, 16>> sample_logliks(const SampleVector& y) {
    const ChannelParams& p = y.params;
    const Modulation& mod = p.modulation();
    const int m = mod.order();
    const NoiseModel nm = NoiseModel::from(p);
    const cplx rot = p.phase_rotation();
    std::vector<std::array<double, 16>> t(size_t(p.sample_count()));
    for (int k = 1; k <= p.sample_count(); ++k) {
        t[size_t(k - 1)].fill(0.0);
        const double s2 = nm.sample_sigma2(k);
        if (!std::isfinite(s2)) continue;
        for (int ia = 0; ia < m; ++ia)
            for (int ib = 0; ib < m; ++ib) {
                cplx mu = 0.0;
                if (overlap_a(k) <= p.n_symbols) mu += mod.symbol(ia);
                if (overlap_b(k) >= 1) mu += mod.symbol(ib) * rot;
                t[size_t(k - 1)][size_t(ia * m + ib)] =
                    -std::norm(y.samples[size_t(k - 1)] - mu) / (2.0 * std::max(s2, kSigma2Floor));
            }
    }
    return t;
}

// P(pair at window w | y[jlo..jhi]) as a dense m x m table (silent
// coordinates marginalize to uniform). All indices 1-based; an empty range
// conditions on nothing.
std::array<double, 16> cond_marginal(const SampleVector& y, int w, int jlo, int jhi) {
    const ChannelParams& p = y.params;
    const Modulation& mod = p.modulation();
    const int m = mod.order();
    const int n = p.n_symbols;
    const auto t = sample_logliks(y);

    long total = 1;
    for (int i = 0; i < n; ++i) total *= m;
    std::vector<std::vector<int>> digits(size_t(total), std::vector<int>(static_cast<size_t>(n)));
    for (long f = 0; f < total; ++f) {
        long rem = f;
        for (int i = 0; i < n; ++i) {
            digits[size_t(f)][size_t(i)] = int(rem % m);
            rem /= m;
        }
    }

    std::array<double, 16> acc{};
    double max_ll = -kInf;
    std::vector<double> lls(size_t(total * total));
    for (long fa = 0; fa < total; ++fa)
        for (long fb = 0; fb < total; ++fb) {
            double ll = 0.0;
            for (int k = jlo; k <= jhi; ++k) {
                const int a = overlap_a(k), b = overlap_b(k);
                const int ia = a <= n ? digits[size_t(fa)][size_t(a - 1)] : 0;
                const int ib = b >= 1 ? digits[size_t(fb)][size_t(b - 1)] : 0;
                ll += t[size_t(k - 1)][size_t(ia * m + ib)];
            }
            lls[size_t(fa * total + fb)] = ll;
            max_ll = std::max(max_ll, ll);
        }
    double norm = 0.0;
    for (long fa = 0; fa < total; ++fa)
        for (long fb = 0; fb < total; ++fb) {
            const double wgt = std::exp(lls[size_t(fa * total + fb)] - max_ll);
            norm += wgt;
            const int a = overlap_a(w), b = overlap_b(w);
            const bool has_a = a <= n, has_b = b >= 1;
            // a silent coordinate is an independent uniform symbol: spread it
            const double share = wgt / double((has_a ? 1 : m) * (has_b ? 1 : m));
            for (int ia = 0; ia < m; ++ia) {
                if (has_a && ia != digits[size_t(fa)][size_t(a - 1)]) continue;
                for (int ib = 0; ib < m; ++ib) {
                    if (has_b && ib != digits[size_t(fb)][size_t(b - 1)]) continue;
                    acc[size_t(ia * m + ib)] += share;
                }
            }
        }
    for (double& v : acc) v /= norm;
    return acc;
}

// Expand a (possibly boundary) log table to a dense m x m probability table;
// silent coordinates spread uniformly.
std::array<double, 16> dense_probs(const PairLogTable& t, int m) {
    std::array<double, 16> out{};
    for (int ia = 0; ia < m; ++ia)
        for (int ib = 0; ib < m; ++ib) {
            const int ta = t.na > 1 ? ia : 0;
            const int tb = t.nb > 1 ? ib : 0;
            double v = std::exp(t(ta, tb));
            if (t.na == 1) v /= m;
            if (t.nb == 1) v /= m;
            out[size_t(ia * m + ib)] = v;
        }
    return out;
}

SampleVector random_instance(ModKind scheme, int n, double delta, double phi, double ebn0,
                             std::uint64_t seed, std::vector<int>* idx_a = nullptr,
                             std::vector<int>* idx_b = nullptr) {
    const ChannelParams p(scheme, n, delta, phi, ebn0);
    const Modulation& mod = p.modulation();
    SplitRng rng(seed);
    std::vector<int> ia(static_cast<size_t>(n)), ib(static_cast<size_t>(n));
    for (int& v : ia) v = int(rng.next_u64() % std::uint64_t(mod.order()));
    for (int& v : ib) v = int(rng.next_u64() % std::uint64_t(mod.order()));
    if (idx_a) *idx_a = ia;
    if (idx_b) *idx_b = ib;
    return transmit(indices_to_symbols(ia, mod), indices_to_symbols(ib, mod), p, rng);
}
}  // namespace

TEST_CASE("evidence dimensions, normalization and peak") {
    const ChannelParams p(ModKind::qpsk, 3, 0.4, 1.3, 6.0);
    const Modulation& q = p.modulation();
    const cplx rot = p.phase_rotation();

    const EvidenceVector first = compute_evidence(q.symbol(1), 1, p);
    CHECK(first.na == 4);
    CHECK(first.nb == 1);
    const EvidenceVector last = compute_evidence(q.symbol(1) * rot, 7, p);
    CHECK(last.na == 1);
    CHECK(last.nb == 4);
    CHECK_THROWS_AS(compute_evidence(cplx(0, 0), 0, p), std::invalid_argument);
    CHECK_THROWS_AS(compute_evidence(cplx(0, 0), 8, p), std::invalid_argument);

    for (int k = 1; k <= 7; ++k) {
        const EvidenceVector ev = compute_evidence(cplx(0.2, -0.4), k, p);
        double s = 0.0;
        for (int i = 0; i < ev.size(); ++i) s += std::exp(ev.logw[size_t(i)]);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }

    // a sample sitting exactly on mu(a0, b0) makes (a0, b0) the argmax
    for (int a0 = 0; a0 < 4; ++a0)
        for (int b0 = 0; b0 < 4; ++b0) {
            const cplx y = q.symbol(a0) + q.symbol(b0) * rot;
            const EvidenceVector ev = compute_evidence(y, 4, p);
            for (int ia = 0; ia < 4; ++ia)
                for (int ib = 0; ib < 4; ++ib)
                    if (ia != a0 || ib != b0) CHECK(ev(ia, ib) <= ev(a0, b0));
        }
}

TEST_CASE("evidence is flat where the constellation is symmetric or the window empty") {
    // BPSK even window at phi = pi/2: the four means are equidistant from 0
    const ChannelParams pb(ModKind::bpsk, 2, 0.5, kPi / 2.0, 4.0);
    const EvidenceVector ev = compute_evidence(cplx(0, 0), 2, pb);
    for (int i = 0; i < 4; ++i)
        CHECK(std::exp(ev.logw[size_t(i)]) == doctest::Approx(0.25).epsilon(1e-12));

    // aligned symbols: odd windows carry nothing
    const ChannelParams pa(ModKind::qpsk, 2, 0.0, 0.9, 4.0);
    const EvidenceVector odd = compute_evidence(cplx(0.3, 0.7), 3, pa);
    for (int i = 0; i < odd.size(); ++i)
        CHECK(odd.logw[size_t(i)] == doctest::Approx(-std::log(16.0)).epsilon(1e-12));
}

TEST_CASE("evidence peaks at the quarter-phase joint constellation point") {
    const ChannelParams p(ModKind::qpsk, 2, 0.5, kPi / 4.0, 0.0);  // sigma2 = 0.25
    CHECK(sigma2_base(p) == doctest::Approx(0.25));
    const Modulation& q = p.modulation();
    const cplx y = q.symbol(0) + q.symbol(2) * p.phase_rotation();
    CHECK(std::abs(std::sqrt(2.0) * y - cplx(1.0, 1.0 - std::sqrt(2.0))) < 1e-12);
    const EvidenceVector ev = compute_evidence(y, 2, p);
    for (int ia = 0; ia < 4; ++ia)
        for (int ib = 0; ib < 4; ++ib)
            if (ia != 0 || ib != 2) CHECK(ev(ia, ib) < ev(0, 2));
}

TEST_CASE("uniform evidence stays uniform through the passes") {
    std::vector<EvidenceVector> ev(3);
    ev[0].set_dims(4, 1);
    ev[1].set_dims(4, 4);
    ev[2].set_dims(1, 4);
    for (auto& e : ev) e.fill_uniform();
    const auto fwd = forward_pass(ev);
    const auto bwd = backward_pass(ev);
    for (const auto& msgs : {fwd, bwd})
        for (const auto& msg : msgs)
            for (int i = 0; i < msg.size(); ++i)
                CHECK(msg.logw[size_t(i)] == doctest::Approx(-std::log(double(msg.size()))));
    const auto bel = beliefs(ev, fwd, bwd, Modulation::qpsk());
    REQUIRE(bel.size() == 1);
    for (int i = 0; i < 16; ++i)
        CHECK(std::exp(bel[0].joint.logw[size_t(i)]) == doctest::Approx(1.0 / 16).epsilon(1e-12));
    for (int c = 0; c < 4; ++c)
        CHECK(bel[0].xor_posterior[size_t(c)] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("noise-free decoding is certain") {
    const ChannelParams p(ModKind::bpsk, 2, 0.5, 0.0, kInf);
    const Modulation& b = p.modulation();
    const std::vector<cplx> xa{b.symbol(0), b.symbol(0)};
    const std::vector<cplx> xb{b.symbol(1), b.symbol(1)};
    SplitRng rng(3);
    const SampleVector sv = transmit(xa, xb, p, rng);
    const auto ev = compute_all_evidence(sv);
    const auto bel = beliefs(ev, forward_pass(ev), backward_pass(ev), b);
    REQUIRE(bel.size() == 2);
    for (const Belief& belief : bel) {
        CHECK(std::exp(belief.joint(0, 1)) == doctest::Approx(1.0));
        CHECK(belief.xor_posterior[1] == doctest::Approx(1.0));  // +1 xor -1 = -1 (index 1)
    }
}

TEST_CASE("messages match the enumeration conditionals") {
    const SampleVector y = random_instance(ModKind::qpsk, 3, 0.35, 1.7, 6.0, 2024);
    const auto ev = compute_all_evidence(y);
    const auto fwd = forward_pass(ev);
    const auto bwd = backward_pass(ev);
    const int m = 4;
    const int count = y.params.sample_count();

    for (int w = 1; w <= count; ++w) {
        // message from the left conditions on samples 1..w-1
        const auto oracle_q = cond_marginal(y, w, 1, w - 1);
        const auto got_q = dense_probs(fwd[size_t(w - 1)], m);
        for (int i = 0; i < m * m; ++i)
            CHECK(std::abs(got_q[size_t(i)] - oracle_q[size_t(i)]) < 1e-9);

        // multiplying in the window's own evidence conditions on samples 1..w
        PairLogTable post = ev[size_t(w - 1)];
        post.multiply_log(fwd[size_t(w - 1)]);
        post.normalize_log();
        const auto oracle_r = cond_marginal(y, w, 1, w);
        const auto got_r = dense_probs(post, m);
        for (int i = 0; i < m * m; ++i)
            CHECK(std::abs(got_r[size_t(i)] - oracle_r[size_t(i)]) < 1e-9);

        // mirrored conditioning for the message from the right
        const auto oracle_l = cond_marginal(y, w, w + 1, count);
        const auto got_l = dense_probs(bwd[size_t(w - 1)], m);
        for (int i = 0; i < m * m; ++i)
            CHECK(std::abs(got_l[size_t(i)] - oracle_l[size_t(i)]) < 1e-9);

        PairLogTable post_l = ev[size_t(w - 1)];
        post_l.multiply_log(bwd[size_t(w - 1)]);
        post_l.normalize_log();
        const auto oracle_s = cond_marginal(y, w, w, count);
        const auto got_s = dense_probs(post_l, m);
        for (int i = 0; i < m * m; ++i)
            CHECK(std::abs(got_s[size_t(i)] - oracle_s[size_t(i)]) < 1e-9);
    }

    // messages and refreshed posteriors stay normalized
    for (const auto& msgs : {fwd, bwd})
        for (const auto& msg : msgs) {
            double s = 0.0;
            for (int i = 0; i < msg.size(); ++i) s += std::exp(msg.logw[size_t(i)]);
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
}

TEST_CASE("beliefs equal brute-force posteriors across all four offset cases") {
    struct Case {
        double delta, phi;
    };
    const Case cases[] = {{0.0, 0.0}, {0.45, 0.0}, {0.0, 1.9}, {0.45, 1.9}};
    int trial = 0;
    for (ModKind scheme : {ModKind::bpsk, ModKind::qpsk}) {
        for (const Case& c : cases) {
            for (int n = 1; n <= 4; ++n) {
                for (double ebn0 : {0.0, 6.0, 12.0}) {
                    const SampleVector y = random_instance(scheme, n, c.delta, c.phi, ebn0,
                                                           9000 + std::uint64_t(trial++));
                    const BruteForcePosterior oracle = brute_force_posterior(y);
                    const auto ev = compute_all_evidence(y);
                    const auto bel = beliefs(ev, forward_pass(ev), backward_pass(ev),
                                             y.params.modulation());
                    const int m = oracle.order;
                    for (int i = 0; i < n; ++i) {
                        const auto got = dense_probs(bel[size_t(i)].joint, m);
                        for (int e = 0; e < m * m; ++e)
                            CHECK(std::abs(got[size_t(e)] -
                                           oracle.joint[size_t(i)][size_t(e)]) < 1e-9);
                    }
                }
            }
        }
    }
}

TEST_CASE("decode_xor picks the MAP coset and breaks ties low") {
    // ground truth XOR of a noise-free packet
    const ChannelParams p(ModKind::bpsk, 2, 0.3, 0.5, kInf);
    const Modulation& b = p.modulation();
    const std::vector<cplx> xa{b.symbol(0), b.symbol(1)};  // +1, -1
    const std::vector<cplx> xb{b.symbol(0), b.symbol(0)};  // +1, +1
    SplitRng rng(17);
    const DecodeResult res = decode_packet(transmit(xa, xb, p, rng));
    CHECK(res.xor_indices == std::vector<int>{0, 1});  // +1, -1

    // exact tie: lowest alphabet index wins
    Belief tie;
    tie.joint.set_dims(2, 2);
    tie.joint.fill_uniform();
    tie.xor_posterior = {0.5, 0.5, 0.0, 0.0};
    CHECK(decode_xor({tie}, b) == std::vector<int>{0});

    // noisy instances agree with the brute-force XOR decision when it is clear-cut
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + trial % 4;
        const SampleVector y = random_instance(ModKind::qpsk, n, 0.35, 2.4, 6.0,
                                               500 + std::uint64_t(trial));
        const BruteForcePosterior oracle = brute_force_posterior(y);
        const DecodeResult res2 = decode_packet(y);
        for (int i = 0; i < n; ++i) {
            std::array<double, 4> xp = oracle.xor_posterior[size_t(i)];
            std::sort(xp.begin(), xp.end());
            if (xp[3] - xp[2] > 1e-6) {
                CHECK(res2.xor_indices[size_t(i)] == oracle.xor_map[size_t(i)]);
                ++checked;
            }
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("a second sweep is a fixed point and direction does not matter") {
    const SampleVector y = random_instance(ModKind::qpsk, 5, 0.25, 0.8, 4.0, 321);
    const auto ev = compute_all_evidence(y);

    // generic in-place scheduler: sweep right then left, twice
    const int count = int(ev.size());
    std::vector<PairLogTable> q(static_cast<size_t>(count)), l(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        q[size_t(i)].set_dims(ev[size_t(i)].na, ev[size_t(i)].nb);
        q[size_t(i)].fill_uniform();
        l[size_t(i)] = q[size_t(i)];
    }
    const auto sweep_once = [&] {
        for (int i = 0; i + 1 < count; ++i) {
            PairLogTable post = ev[size_t(i)];
            post.multiply_log(q[size_t(i)]);
            post.normalize_log();
            detail::collapse_message(post, i % 2 == 0, q[size_t(i + 1)]);
        }
        for (int i = count - 1; i > 0; --i) {
            PairLogTable post = ev[size_t(i)];
            post.multiply_log(l[size_t(i)]);
            post.normalize_log();
            detail::collapse_message(post, i % 2 == 1, l[size_t(i - 1)]);
        }
    };
    sweep_once();
    const auto q1 = q, l1 = l;
    sweep_once();
    for (int i = 0; i < count; ++i)
        for (int e = 0; e < q[size_t(i)].size(); ++e) {
            CHECK(std::abs(q[size_t(i)].logw[size_t(e)] - q1[size_t(i)].logw[size_t(e)]) < 1e-12);
            CHECK(std::abs(l[size_t(i)].logw[size_t(e)] - l1[size_t(i)].logw[size_t(e)]) < 1e-12);
        }

    // the scheduler's messages match the library passes, in either order
    const auto bwd = backward_pass(ev);
    const auto fwd = forward_pass(ev);
    for (int i = 0; i < count; ++i)
        for (int e = 0; e < q[size_t(i)].size(); ++e) {
            CHECK(std::abs(fwd[size_t(i)].logw[size_t(e)] - q1[size_t(i)].logw[size_t(e)]) < 1e-12);
            CHECK(std::abs(bwd[size_t(i)].logw[size_t(e)] - l1[size_t(i)].logw[size_t(e)]) < 1e-12);
        }
}

TEST_CASE("aligned in-phase BPSK reduces to the per-sample rule") {
    const ChannelParams p(ModKind::bpsk, 64, 0.0, 0.0, 4.0);
    const Modulation& b = p.modulation();
    const double s2 = sigma2_base(p);
    SplitRng rng(606);
    for (int pkt = 0; pkt < 100; ++pkt) {
        std::vector<int> ia(64), ib(64);
        for (int& v : ia) v = rng.next_bit();
        for (int& v : ib) v = rng.next_bit();
        const SampleVector sv =
            transmit(indices_to_symbols(ia, b), indices_to_symbols(ib, b), p, rng);
        const DecodeResult res = decode_packet(sv);
        for (int n = 1; n <= 64; ++n) {
            const int rule = sync_bpsk_decide(sv.samples[size_t(2 * n - 1)], s2) > 0 ? 0 : 1;
            CHECK(res.xor_indices[size_t(n - 1)] == rule);
        }
    }
}

TEST_CASE("quarter-turn phase shift relabels the joint beliefs") {
    const Modulation& q = Modulation::qpsk();
    const double phi = 0.6;
    const ChannelParams p1(ModKind::qpsk, 6, 0.4, phi + kPi / 2.0, 8.0);
    const ChannelParams p2(ModKind::qpsk, 6, 0.4, phi, 8.0);

    std::vector<int> ia{0, 1, 2, 3, 1, 2}, ib{3, 3, 0, 1, 2, 0};
    const std::vector<cplx> xa = indices_to_symbols(ia, q);
    const std::vector<cplx> xb = indices_to_symbols(ib, q);
    std::vector<cplx> xb_rot(xb.size());
    std::array<int, 4> jmap{};
    for (int i = 0; i < 4; ++i) jmap[size_t(i)] = q.index_of(q.symbol(i) * cplx(0, 1));
    for (size_t i = 0; i < xb.size(); ++i) xb_rot[i] = q.symbol(jmap[size_t(ib[i])]);

    SplitRng r1(808), r2(808);  // identical noise
    const SampleVector y1 = transmit(xa, xb, p1, r1);
    const SampleVector y2 = transmit(xa, xb_rot, p2, r2);

    const auto ev1 = compute_all_evidence(y1);
    const auto ev2 = compute_all_evidence(y2);
    const auto bel1 = beliefs(ev1, forward_pass(ev1), backward_pass(ev1), q);
    const auto bel2 = beliefs(ev2, forward_pass(ev2), backward_pass(ev2), q);
    for (size_t n = 0; n < bel1.size(); ++n)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                CHECK(std::abs(std::exp(bel1[n].joint(a, b)) -
                               std::exp(bel2[n].joint(a, jmap[size_t(b)]))) < 1e-10);
}

TEST_CASE("long packets decode with finite log-domain values") {
    for (double ebn0 : {0.0, 16.0}) {
        for (ModKind scheme : {ModKind::bpsk, ModKind::qpsk}) {
            const Modulation& mod = Modulation::get(scheme);
            const int n = 2048 / mod.bits_per_symbol();
            const ChannelParams p(scheme, n, 0.5, kPi / 4.0, ebn0);
            SplitRng rng(42 + int(ebn0));
            std::vector<int> ia(static_cast<size_t>(n)), ib(static_cast<size_t>(n));
            for (int& v : ia) v = int(rng.next_u64() % std::uint64_t(mod.order()));
            for (int& v : ib) v = int(rng.next_u64() % std::uint64_t(mod.order()));
            const SampleVector sv =
                transmit(indices_to_symbols(ia, mod), indices_to_symbols(ib, mod), p, rng);

            const auto ev = compute_all_evidence(sv);
            const auto fwd = forward_pass(ev);
            const auto bwd = backward_pass(ev);
            for (const auto& msgs : {fwd, bwd})
                for (const auto& msg : msgs) CHECK(msg.all_finite());
            const auto bel = beliefs(ev, fwd, bwd, mod);
            for (const Belief& belief : bel) {
                CHECK(belief.joint.all_finite());
                double s = 0.0;
                for (int c = 0; c < mod.order(); ++c) {
                    CHECK(std::isfinite(belief.xor_posterior[size_t(c)]));
                    s += belief.xor_posterior[size_t(c)];
                }
                CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
            }
        }
    }
}
