#pragma once

#include "apnc/harness.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace apnc {

inline constexpr const char* kCsvSchema = "# schema=1";
inline constexpr const char* kCsvHeader = "scheme,delta,phi,ebn0_db,bits,errors,ber,stderr";

namespace detail {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// Frozen record format (schema 1): comment line, header, one row per point,
/// LF endings, full-precision floats.
inline void write_ber_csv(std::ostream& os, std::span<const BerRecord> records) {
    os << kCsvSchema << "\n" << kCsvHeader << "\n";
    for (const BerRecord& r : records) {
        os << to_string(r.scheme) << ',' << detail::format_double(r.delta) << ','
           << detail::format_double(r.phi) << ',' << detail::format_double(r.ebn0_db) << ','
           << r.trials_bits << ',' << r.bit_errors << ',' << detail::format_double(r.ber) << ','
           << detail::format_double(r.std_err) << "\n";
    }
}

inline std::string ber_csv_string(std::span<const BerRecord> records) {
    std::ostringstream os;
    write_ber_csv(os, records);
    return os.str();
}

inline std::vector<BerRecord> read_ber_csv(std::istream& is) {
    std::string line;
    bool schema_seen = false;
    bool header_seen = false;
    std::vector<BerRecord> records;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# schema=", 0) == 0) {
                if (line != kCsvSchema)
                    throw std::invalid_argument("unsupported CSV schema: " + line);
                schema_seen = true;
            }
            continue;
        }
        if (!schema_seen)
            throw std::invalid_argument("missing '# schema=1' line before CSV data");
        if (!header_seen) {
            if (line != kCsvHeader)
                throw std::invalid_argument("unexpected CSV header: " + line);
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 8)
            throw std::invalid_argument("line " + std::to_string(line_no) +
                                        ": expected 8 CSV fields, got " +
                                        std::to_string(fields.size()));
        BerRecord r;
        r.scheme = mod_kind_from_string(fields[0]);
        r.delta = std::strtod(fields[1].c_str(), nullptr);
        r.phi = std::strtod(fields[2].c_str(), nullptr);
        r.ebn0_db = std::strtod(fields[3].c_str(), nullptr);
        r.trials_bits = std::strtoll(fields[4].c_str(), nullptr, 10);
        r.bit_errors = std::strtoll(fields[5].c_str(), nullptr, 10);
        r.ber = std::strtod(fields[6].c_str(), nullptr);
        r.std_err = std::strtod(fields[7].c_str(), nullptr);
        records.push_back(r);
    }
    if (!header_seen) throw std::invalid_argument("CSV contains no data header");
    return records;
}

/// Split records into curves keyed by (scheme, delta, phi), keeping first-seen
/// order and the row order within each curve.
inline std::vector<std::vector<BerRecord>> group_curves(std::span<const BerRecord> records) {
    std::vector<std::vector<BerRecord>> curves;
    for (const BerRecord& r : records) {
        bool placed = false;
        for (auto& c : curves) {
            if (c.front().scheme == r.scheme && c.front().delta == r.delta &&
                c.front().phi == r.phi) {
                c.push_back(r);
                placed = true;
                break;
            }
        }
        if (!placed) curves.push_back({r});
    }
    return curves;
}

}  // namespace apnc
