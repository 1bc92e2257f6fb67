#pragma once

#include "apnc/modulation.hpp"
#include "apnc/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace apnc {

/// Symbol offsets below this are treated as exactly zero (aligned symbols).
inline constexpr double kDeltaEpsilon = 1e-9;

/// Variance floor used when forming likelihoods of noise-free samples, so the
/// Gaussian exponent stays a well-defined (if enormous) finite number.
inline constexpr double kSigma2Floor = 1e-30;

/// Uplink configuration for one packet exchange: modulation, packet length N,
/// symbol offset delta in [0,1) (fraction of a symbol period), carrier phase
/// offset phi, and per-bit SNR. ebn0_db may be +infinity for a noise-free
/// channel.
struct ChannelParams {
    ModKind scheme = ModKind::bpsk;
    int n_symbols = 1;
    double delta = 0.0;
    double phi = 0.0;
    double ebn0_db = 0.0;

    ChannelParams() = default;

    ChannelParams(ModKind scheme_, int n_symbols_, double delta_, double phi_, double ebn0_db_)
        : scheme(scheme_), n_symbols(n_symbols_), delta(delta_), phi(phi_), ebn0_db(ebn0_db_) {
        if (n_symbols < 1) throw std::invalid_argument("packet length must be at least 1 symbol");
        if (!(delta >= 0.0)) throw std::invalid_argument("symbol offset must satisfy 0 <= delta < 1");
        if (delta < kDeltaEpsilon) delta = 0.0;
        if (delta > 1.0 - kDeltaEpsilon)
            throw std::invalid_argument(
                "symbol offset must satisfy delta < 1 (a full-period offset is a zero offset "
                "with the packet roles swapped)");
        if (std::isnan(phi)) throw std::invalid_argument("phase offset must be a number");
        phi = std::fmod(phi, 2.0 * std::numbers::pi);
        if (phi < 0.0) phi += 2.0 * std::numbers::pi;
        if (std::isnan(ebn0_db) || ebn0_db == -std::numeric_limits<double>::infinity())
            throw std::invalid_argument("Eb/N0 must be finite or +infinity");
    }

    const Modulation& modulation() const { return Modulation::get(scheme); }
    int sample_count() const { return 2 * n_symbols + 1; }
    cplx phase_rotation() const { return std::polar(1.0, phi); }
    bool noise_free() const { return std::isinf(ebn0_db); }
};

/// Per-component noise variance of the normalized baseband samples.
///
/// With unit-energy symbols the pre-oversampling variance is
/// 1 / (2 * bits_per_symbol * 10^(ebn0_db/10)): QPSK carries two bits per
/// symbol at the same energy per bit, so it sees half the per-component
/// variance of BPSK at equal Eb/N0.
inline double sigma2_base(const ChannelParams& p) {
    if (p.noise_free())
        throw std::domain_error("Eb/N0 is infinite; use the noise-free path");
    const double ebn0 = std::pow(10.0, p.ebn0_db / 10.0);
    return 1.0 / (2.0 * p.modulation().bits_per_symbol() * ebn0);
}

/// Noise levels per oversample window. Odd samples (and the tail sample
/// 2N+1) integrate over the delta-long sub-interval and see variance
/// sigma2/delta; even samples integrate over the rest and see
/// sigma2/(1-delta). At delta = 0 the odd windows have zero width: their
/// variance is infinite and they carry no usable signal.
struct NoiseModel {
    double sigma2 = 0.0;
    double odd_sigma2 = 0.0;
    double even_sigma2 = 0.0;

    static NoiseModel from(const ChannelParams& p) {
        NoiseModel nm;
        nm.sigma2 = p.noise_free() ? 0.0 : sigma2_base(p);
        nm.odd_sigma2 = p.delta == 0.0 ? std::numeric_limits<double>::infinity()
                                       : nm.sigma2 / p.delta;
        nm.even_sigma2 = nm.sigma2 / (1.0 - p.delta);
        return nm;
    }

    /// k is the 1-based sample index; odd indices include the tail sample.
    double sample_sigma2(int k) const { return (k % 2 != 0) ? odd_sigma2 : even_sigma2; }
    bool sample_usable(int k) const { return std::isfinite(sample_sigma2(k)); }
};

/// Overlap structure of oversample window k (1-based): the window sees A's
/// symbol ceil(k/2) and B's symbol floor(k/2), both 1-based. A value of 0 or
/// N+1 means the corresponding source is silent in that window.
inline int overlap_a(int k) { return (k + 1) / 2; }
inline int overlap_b(int k) { return k / 2; }

/// Noiseless oversampled superposition: 2N+1 window means
/// mean[k] = x_A[ceil(k/2)] + x_B[floor(k/2)] e^{j phi}, with x_A[N+1] and
/// x_B[0] absent.
inline std::vector<cplx> oversample_means(std::span<const cplx> xa, std::span<const cplx> xb,
                                          const ChannelParams& p) {
    const size_t n = size_t(p.n_symbols);
    if (xa.size() != n || xb.size() != n)
        throw std::invalid_argument("packet lengths do not match channel configuration");
    const cplx rot = p.phase_rotation();
    std::vector<cplx> means(size_t(p.sample_count()));
    for (int k = 1; k <= p.sample_count(); ++k) {
        const int a = overlap_a(k);
        const int b = overlap_b(k);
        cplx m = 0.0;
        if (a <= p.n_symbols) m += xa[size_t(a - 1)];
        if (b >= 1) m += xb[size_t(b - 1)] * rot;
        means[size_t(k - 1)] = m;
    }
    return means;
}

/// One received uplink packet: the 2N+1 oversampled values. When delta = 0
/// the odd windows have no width; those entries are emitted as NaN markers
/// and must not be read.
struct SampleVector {
    std::vector<cplx> samples;
    ChannelParams params;

    /// k is the 1-based sample index.
    bool usable(int k) const { return params.delta > 0.0 || k % 2 == 0; }
};

inline SampleVector transmit(std::span<const cplx> xa, std::span<const cplx> xb,
                             const ChannelParams& p, SplitRng& rng) {
    SampleVector sv;
    sv.params = p;
    sv.samples = oversample_means(xa, xb, p);
    const NoiseModel nm = NoiseModel::from(p);
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    for (int k = 1; k <= p.sample_count(); ++k) {
        const double s2 = nm.sample_sigma2(k);
        if (!std::isfinite(s2)) {
            sv.samples[size_t(k - 1)] = cplx(nan, nan);
        } else if (s2 > 0.0) {
            const auto [gr, gi] = rng.next_gauss_pair();
            const double s = std::sqrt(s2);
            sv.samples[size_t(k - 1)] += cplx(gr * s, gi * s);
        }
    }
    return sv;
}

}  // namespace apnc
