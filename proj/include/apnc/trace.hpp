#pragma once

#include "apnc/channel.hpp"

#include "json.hpp"

#include <istream>
#include <limits>
#include <ostream>

namespace apnc {

/// JSON trace of one received packet: channel configuration plus the 2N+1
/// complex samples. Zero-width windows (delta = 0, odd index) and an
/// infinite Eb/N0 serialize as null / "inf", since JSON has no NaN.
inline void write_trace(std::ostream& os, const SampleVector& sv) {
    nlohmann::json j;
    j["schema"] = 1;
    j["scheme"] = to_string(sv.params.scheme);
    j["n_symbols"] = sv.params.n_symbols;
    j["delta"] = sv.params.delta;
    j["phi"] = sv.params.phi;
    if (sv.params.noise_free())
        j["ebn0_db"] = "inf";
    else
        j["ebn0_db"] = sv.params.ebn0_db;
    nlohmann::json samples = nlohmann::json::array();
    for (int k = 1; k <= sv.params.sample_count(); ++k) {
        const cplx y = sv.samples[size_t(k - 1)];
        if (!sv.usable(k))
            samples.push_back(nullptr);
        else
            samples.push_back({y.real(), y.imag()});
    }
    j["samples"] = std::move(samples);
    os << j.dump(2) << "\n";
}

inline SampleVector read_trace(std::istream& is) {
    const nlohmann::json j = nlohmann::json::parse(is);
    if (!j.contains("schema") || j["schema"].get<int>() != 1)
        throw std::invalid_argument("trace: missing or unsupported schema");
    const double ebn0 = j["ebn0_db"].is_string()
                            ? (j["ebn0_db"].get<std::string>() == "inf"
                                   ? std::numeric_limits<double>::infinity()
                                   : throw std::invalid_argument("trace: bad ebn0_db"))
                            : j["ebn0_db"].get<double>();
    SampleVector sv;
    sv.params = ChannelParams(mod_kind_from_string(j["scheme"].get<std::string>()),
                              j["n_symbols"].get<int>(), j["delta"].get<double>(),
                              j["phi"].get<double>(), ebn0);
    const auto& samples = j["samples"];
    if (int(samples.size()) != sv.params.sample_count())
        throw std::invalid_argument("trace: expected " +
                                    std::to_string(sv.params.sample_count()) + " samples, got " +
                                    std::to_string(samples.size()));
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    sv.samples.reserve(samples.size());
    int k = 0;
    for (const auto& s : samples) {
        ++k;
        if (s.is_null()) {
            if (sv.usable(k))
                throw std::invalid_argument("trace: null sample in a usable window");
            sv.samples.emplace_back(nan, nan);
        } else {
            if (!s.is_array() || s.size() != 2)
                throw std::invalid_argument("trace: samples must be [re, im] pairs or null");
            sv.samples.emplace_back(s[0].get<double>(), s[1].get<double>());
        }
    }
    return sv;
}

}  // namespace apnc
