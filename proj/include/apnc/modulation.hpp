#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace apnc {

using cplx = std::complex<double>;

enum class ModKind { bpsk, qpsk };

inline const char* to_string(ModKind k) {
    return k == ModKind::bpsk ? "bpsk" : "qpsk";
}

inline ModKind mod_kind_from_string(const std::string& s) {
    if (s == "bpsk" || s == "BPSK") return ModKind::bpsk;
    if (s == "qpsk" || s == "QPSK") return ModKind::qpsk;
    throw std::invalid_argument("unknown modulation scheme: " + s);
}

/// Modulation alphabet with its bit labeling and the symbol-level XOR used
/// for network-coded relaying.
///
/// Symbols are unit energy. A bit word lists the in-phase bit first and (for
/// QPSK) the quadrature bit second; bit 0 maps to the positive component, so
/// BPSK sends +1 for bit 0 and -1 for bit 1, and QPSK is two such maps in
/// parallel. The XOR of two symbols is the symbol of the XORed bit words.
/// Alphabet order is fixed so probability vectors over symbol pairs can be
/// addressed by (index_a, index_b): BPSK [+1, -1], QPSK [(1+j), (-1+j),
/// (-1-j), (1-j)] / sqrt(2).
class Modulation {
public:
    static const Modulation& get(ModKind kind) {
        static const Modulation b(ModKind::bpsk);
        static const Modulation q(ModKind::qpsk);
        return kind == ModKind::bpsk ? b : q;
    }
    static const Modulation& bpsk() { return get(ModKind::bpsk); }
    static const Modulation& qpsk() { return get(ModKind::qpsk); }

    ModKind kind() const { return kind_; }
    int bits_per_symbol() const { return bps_; }
    int order() const { return m_; }

    std::span<const cplx> alphabet() const { return {alphabet_.data(), size_t(m_)}; }
    cplx symbol(int index) const { return alphabet_[size_t(index)]; }

    /// Packed bit word of an alphabet entry, first bit in the high position.
    unsigned label(int index) const { return labels_[size_t(index)]; }
    int index_of_label(unsigned lab) const { return label_to_index_[lab]; }

    /// Alphabet index of s, or -1 when s is not an alphabet entry.
    int index_of(cplx s) const {
        for (int i = 0; i < m_; ++i) {
            if (std::abs(s.real() - alphabet_[size_t(i)].real()) <= kMatchTol &&
                std::abs(s.imag() - alphabet_[size_t(i)].imag()) <= kMatchTol)
                return i;
        }
        return -1;
    }

    int xor_index(int ia, int ib) const {
        return label_to_index_[labels_[size_t(ia)] ^ labels_[size_t(ib)]];
    }
    cplx xor_symbol(int ia, int ib) const { return alphabet_[size_t(xor_index(ia, ib))]; }

    /// Hamming distance between the bit words of two alphabet entries.
    int bit_distance(int ia, int ib) const {
        return std::popcount(labels_[size_t(ia)] ^ labels_[size_t(ib)]);
    }

private:
    static constexpr double kMatchTol = 1e-12;

    explicit Modulation(ModKind kind) : kind_(kind) {
        if (kind == ModKind::bpsk) {
            bps_ = 1;
            m_ = 2;
            alphabet_ = {cplx(1.0, 0.0), cplx(-1.0, 0.0)};
            labels_ = {0u, 1u};
        } else {
            bps_ = 2;
            m_ = 4;
            const double c = 1.0 / std::sqrt(2.0);
            alphabet_ = {cplx(c, c), cplx(-c, c), cplx(-c, -c), cplx(c, -c)};
            labels_ = {0b00u, 0b10u, 0b11u, 0b01u};
        }
        label_to_index_.fill(-1);
        for (int i = 0; i < m_; ++i) label_to_index_[labels_[size_t(i)]] = i;
    }

    ModKind kind_;
    int bps_ = 0;
    int m_ = 0;
    std::array<cplx, 4> alphabet_{};
    std::array<unsigned, 4> labels_{};
    std::array<int, 4> label_to_index_{};
};

inline cplx bits_to_symbol(std::span<const int> word, const Modulation& mod) {
    if (int(word.size()) != mod.bits_per_symbol())
        throw std::invalid_argument("bit word length does not match modulation");
    unsigned lab = 0;
    for (int b : word) {
        if (b != 0 && b != 1) throw std::invalid_argument("bits must be 0 or 1");
        lab = (lab << 1) | unsigned(b);
    }
    return mod.symbol(mod.index_of_label(lab));
}

inline std::vector<int> symbol_to_bits(cplx s, const Modulation& mod) {
    const int idx = mod.index_of(s);
    if (idx < 0) throw std::invalid_argument("symbol is not in the alphabet");
    const unsigned lab = mod.label(idx);
    std::vector<int> word(size_t(mod.bits_per_symbol()));
    for (int j = 0; j < mod.bits_per_symbol(); ++j)
        word[size_t(j)] = int((lab >> (mod.bits_per_symbol() - 1 - j)) & 1u);
    return word;
}

inline cplx xor_symbols(cplx a, cplx b, const Modulation& mod) {
    const int ia = mod.index_of(a);
    const int ib = mod.index_of(b);
    if (ia < 0 || ib < 0) throw std::invalid_argument("xor operand is not in the alphabet");
    return mod.xor_symbol(ia, ib);
}

/// Map a packet of bits to alphabet indices, bits_per_symbol bits at a time.
inline std::vector<int> pack_bits_to_indices(std::span<const int> bits, const Modulation& mod) {
    const int bps = mod.bits_per_symbol();
    if (bits.size() % size_t(bps) != 0)
        throw std::invalid_argument("packet length is not divisible by bits per symbol");
    std::vector<int> indices;
    indices.reserve(bits.size() / size_t(bps));
    for (size_t i = 0; i < bits.size(); i += size_t(bps)) {
        unsigned lab = 0;
        for (int j = 0; j < bps; ++j) {
            const int b = bits[i + size_t(j)];
            if (b != 0 && b != 1) throw std::invalid_argument("bits must be 0 or 1");
            lab = (lab << 1) | unsigned(b);
        }
        indices.push_back(mod.index_of_label(lab));
    }
    return indices;
}

inline std::vector<cplx> pack_bits(std::span<const int> bits, const Modulation& mod) {
    const std::vector<int> idx = pack_bits_to_indices(bits, mod);
    std::vector<cplx> symbols(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) symbols[i] = mod.symbol(idx[i]);
    return symbols;
}

inline std::vector<int> unpack_symbols(std::span<const cplx> symbols, const Modulation& mod) {
    std::vector<int> bits;
    bits.reserve(symbols.size() * size_t(mod.bits_per_symbol()));
    for (cplx s : symbols) {
        const std::vector<int> word = symbol_to_bits(s, mod);
        bits.insert(bits.end(), word.begin(), word.end());
    }
    return bits;
}

inline std::vector<cplx> indices_to_symbols(std::span<const int> indices, const Modulation& mod) {
    std::vector<cplx> symbols(indices.size());
    for (size_t i = 0; i < indices.size(); ++i) symbols[i] = mod.symbol(indices[i]);
    return symbols;
}

}  // namespace apnc
