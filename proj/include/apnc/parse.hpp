#pragma once

#include <cctype>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace apnc {

namespace detail {

inline std::string trimmed(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_plain_double(const std::string& s) {
    const std::string t = trimmed(s);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size())
        throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

}  // namespace detail

/// Angle in radians. Accepts plain decimals and rational multiples of pi
/// ("pi", "pi/4", "3pi/8", "3*pi/4"), so grid labels stay drift-free.
inline double parse_angle(const std::string& s) {
    const std::string t = detail::trimmed(s);
    const size_t pos = t.find("pi");
    if (pos == std::string::npos) return detail::parse_plain_double(t);
    double coef = 1.0;
    std::string head = detail::trimmed(t.substr(0, pos));
    if (!head.empty() && head.back() == '*') head = detail::trimmed(head.substr(0, head.size() - 1));
    if (!head.empty()) {
        if (head == "-") {
            coef = -1.0;
        } else {
            coef = detail::parse_plain_double(head);
        }
    }
    double den = 1.0;
    std::string tail = detail::trimmed(t.substr(pos + 2));
    if (!tail.empty()) {
        if (tail[0] != '/') throw std::invalid_argument("bad angle: '" + s + "'");
        den = detail::parse_plain_double(tail.substr(1));
        if (den == 0.0) throw std::invalid_argument("bad angle (zero denominator): '" + s + "'");
    }
    return coef * std::numbers::pi / den;
}

/// Fraction of a symbol period. Accepts decimals and rationals ("1/2").
inline double parse_fraction(const std::string& s) {
    const std::string t = detail::trimmed(s);
    const size_t pos = t.find('/');
    if (pos == std::string::npos) return detail::parse_plain_double(t);
    const double num = detail::parse_plain_double(t.substr(0, pos));
    const double den = detail::parse_plain_double(t.substr(pos + 1));
    if (den == 0.0) throw std::invalid_argument("bad fraction (zero denominator): '" + s + "'");
    return num / den;
}

template <typename Parser>
std::vector<double> parse_list(const std::string& s, Parser parse_one) {
    std::vector<double> out;
    size_t begin = 0;
    while (begin <= s.size()) {
        const size_t comma = s.find(',', begin);
        const std::string item = s.substr(begin, comma == std::string::npos ? comma : comma - begin);
        out.push_back(parse_one(item));
        if (comma == std::string::npos) break;
        begin = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

/// Eb/N0 grid: either "start:step:stop" (inclusive) or a comma list. "inf"
/// parses to +infinity for noise-free runs.
inline std::vector<double> parse_ebn0_grid(const std::string& s) {
    const std::string t = detail::trimmed(s);
    const size_t c1 = t.find(':');
    if (c1 == std::string::npos)
        return parse_list(t, detail::parse_plain_double);
    const size_t c2 = t.find(':', c1 + 1);
    if (c2 == std::string::npos)
        throw std::invalid_argument("range must be start:step:stop, got '" + s + "'");
    const double start = detail::parse_plain_double(t.substr(0, c1));
    const double step = detail::parse_plain_double(t.substr(c1 + 1, c2 - c1 - 1));
    const double stop = detail::parse_plain_double(t.substr(c2 + 1));
    if (step <= 0.0) throw std::invalid_argument("range step must be positive");
    std::vector<double> out;
    for (int i = 0;; ++i) {
        const double v = start + step * i;
        if (v > stop + 1e-9 * step) break;
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty range: '" + s + "'");
    return out;
}

}  // namespace apnc
