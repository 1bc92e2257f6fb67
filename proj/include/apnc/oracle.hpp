#pragma once

#include "apnc/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace apnc {

/// Log-likelihood of the received samples given a candidate packet pair:
/// sum over usable samples of -|y_k - mu_k|^2 / (2 sigma_k^2) - log(2 pi
/// sigma_k^2), with mu_k the noiseless window means. Zero-width windows
/// (delta = 0, odd k) carry no information and are skipped.
inline double joint_likelihood(const SampleVector& y, std::span<const cplx> xa,
                               std::span<const cplx> xb) {
    const ChannelParams& p = y.params;
    const std::vector<cplx> means = oversample_means(xa, xb, p);
    const NoiseModel nm = NoiseModel::from(p);
    double ll = 0.0;
    for (int k = 1; k <= p.sample_count(); ++k) {
        const double s2 = nm.sample_sigma2(k);
        if (!std::isfinite(s2)) continue;
        const double s2eff = std::max(s2, kSigma2Floor);
        const cplx d = y.samples[size_t(k - 1)] - means[size_t(k - 1)];
        ll += -std::norm(d) / (2.0 * s2eff) - std::log(2.0 * std::numbers::pi * s2eff);
    }
    return ll;
}

/// Exact posterior obtained by enumerating every packet pair. Exponential in
/// the packet length; usable as a ground-truth reference for short packets.
struct BruteForcePosterior {
    int order = 0;                               // alphabet size M
    std::vector<std::array<double, 16>> joint;   // per symbol: P(x_A[n]=a, x_B[n]=b | Y), row-major
    std::vector<std::array<double, 4>> xor_posterior;  // per symbol: P(x_A[n] xor x_B[n] | Y)
    std::vector<int> xor_map;                    // argmax of xor_posterior (lowest index on ties)
};

inline BruteForcePosterior brute_force_posterior(const SampleVector& y) {
    const ChannelParams& p = y.params;
    const Modulation& mod = p.modulation();
    const int n = p.n_symbols;
    const int m = mod.order();
    if (n > 6) throw std::invalid_argument("brute-force enumeration refused for packets longer than 6 symbols");

    // Per-sample log-likelihood tables over the overlapping symbol pair.
    const int samples = p.sample_count();
    const NoiseModel nm = NoiseModel::from(p);
    const cplx rot = p.phase_rotation();
    std::vector<std::array<double, 16>> table(static_cast<size_t>(samples));
    for (int k = 1; k <= samples; ++k) {
        auto& t = table[size_t(k - 1)];
        t.fill(0.0);
        const double s2 = nm.sample_sigma2(k);
        if (!std::isfinite(s2)) continue;
        const double s2eff = std::max(s2, kSigma2Floor);
        const double logz = std::log(2.0 * std::numbers::pi * s2eff);
        const bool has_a = overlap_a(k) <= n;
        const bool has_b = overlap_b(k) >= 1;
        for (int ia = 0; ia < m; ++ia) {
            for (int ib = 0; ib < m; ++ib) {
                cplx mu = 0.0;
                if (has_a) mu += mod.symbol(ia);
                if (has_b) mu += mod.symbol(ib) * rot;
                const cplx d = y.samples[size_t(k - 1)] - mu;
                t[size_t(ia * m + ib)] = -std::norm(d) / (2.0 * s2eff) - logz;
            }
        }
    }

    // Digit expansion of every flat packet index.
    long total = 1;
    for (int i = 0; i < n; ++i) total *= m;
    std::vector<std::array<int8_t, 6>> digits(static_cast<size_t>(total));
    for (long f = 0; f < total; ++f) {
        long rem = f;
        for (int i = 0; i < n; ++i) {
            digits[size_t(f)][size_t(i)] = int8_t(rem % m);
            rem /= m;
        }
    }

    auto pair_loglik = [&](const std::array<int8_t, 6>& da, const std::array<int8_t, 6>& db) {
        double ll = 0.0;
        for (int k = 1; k <= samples; ++k) {
            const int a = overlap_a(k);
            const int b = overlap_b(k);
            const int ia = a <= n ? da[size_t(a - 1)] : 0;
            const int ib = b >= 1 ? db[size_t(b - 1)] : 0;
            ll += table[size_t(k - 1)][size_t(ia * m + ib)];
        }
        return ll;
    };

    // Two passes: global max for stable exponentials, then accumulation.
    double max_ll = -std::numeric_limits<double>::infinity();
    for (long fa = 0; fa < total; ++fa)
        for (long fb = 0; fb < total; ++fb)
            max_ll = std::max(max_ll, pair_loglik(digits[size_t(fa)], digits[size_t(fb)]));

    BruteForcePosterior out;
    out.order = m;
    out.joint.assign(size_t(n), {});
    double norm = 0.0;
    for (long fa = 0; fa < total; ++fa) {
        for (long fb = 0; fb < total; ++fb) {
            const auto& da = digits[size_t(fa)];
            const auto& db = digits[size_t(fb)];
            const double w = std::exp(pair_loglik(da, db) - max_ll);
            norm += w;
            for (int i = 0; i < n; ++i)
                out.joint[size_t(i)][size_t(da[size_t(i)] * m + db[size_t(i)])] += w;
        }
    }
    for (auto& j : out.joint)
        for (double& w : j) w /= norm;

    out.xor_posterior.assign(size_t(n), {});
    out.xor_map.assign(size_t(n), 0);
    for (int i = 0; i < n; ++i) {
        auto& xp = out.xor_posterior[size_t(i)];
        for (int ia = 0; ia < m; ++ia)
            for (int ib = 0; ib < m; ++ib)
                xp[size_t(mod.xor_index(ia, ib))] += out.joint[size_t(i)][size_t(ia * m + ib)];
        int best = 0;
        for (int c = 1; c < m; ++c)
            if (xp[size_t(c)] > xp[size_t(best)]) best = c;
        out.xor_map[size_t(i)] = best;
    }
    return out;
}

/// Aligned-and-in-phase BPSK relay decision on one even sample: the summed
/// likelihoods of the equal-bit hypotheses (means +-2) against the two
/// distinct-bit hypotheses (both mean 0). Returns the XOR symbol +1 or -1;
/// equality goes to +1.
inline int sync_bpsk_decide(cplx y_even, double sigma2) {
    const double yr = y_even.real();
    const double inv = 0.5 / std::max(sigma2, kSigma2Floor);
    const double same = std::exp(-(yr - 2.0) * (yr - 2.0) * inv) +
                        std::exp(-(yr + 2.0) * (yr + 2.0) * inv);
    const double diff = 2.0 * std::exp(-yr * yr * inv);
    return same >= diff ? +1 : -1;
}

namespace detail {

/// Adaptive Simpson quadrature with absolute tolerance.
template <typename F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

/// Semi-analytic bit error rate of the aligned-and-in-phase BPSK relay rule:
/// the decision regions of sync_bpsk_decide are located by bisection and the
/// Gaussian density of each equiprobable hypothesis is integrated over the
/// wrong-decision region with adaptive Simpson quadrature (abs. tol. 1e-10).
inline double sync_bpsk_ber(double ebn0_db) {
    if (std::isinf(ebn0_db)) return 0.0;
    const double s2 = 1.0 / (2.0 * std::pow(10.0, ebn0_db / 10.0));
    const double sigma = std::sqrt(s2);

    // decide() flips from -1 to +1 at a single threshold in |y|.
    double lo = 0.0;
    double hi = 2.0;
    while (sync_bpsk_decide(cplx(hi, 0.0), s2) < 0) hi += std::max(sigma, 1.0);
    for (int i = 0; i < 200 && (hi - lo) > 1e-15 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (sync_bpsk_decide(cplx(mid, 0.0), s2) < 0)
            lo = mid;
        else
            hi = mid;
    }
    const double threshold = 0.5 * (lo + hi);

    const auto gauss = [&](double mean) {
        return [mean, sigma](double x) {
            const double z = (x - mean) / sigma;
            return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
        };
    };
    const double tol = 1e-10;
    // Equal-bit hypotheses err when |y| < threshold; distinct-bit ones when
    // |y| >= threshold. All four integrals reduce to mass inside the band.
    const double err_plus = detail::integrate(gauss(+2.0), -threshold, threshold, tol);
    const double err_minus = detail::integrate(gauss(-2.0), -threshold, threshold, tol);
    const double err_diff = 1.0 - detail::integrate(gauss(0.0), -threshold, threshold, tol);
    return (err_plus + err_minus + 2.0 * err_diff) / 4.0;
}

}  // namespace apnc
