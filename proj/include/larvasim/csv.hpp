#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "larvasim/errors.hpp"

namespace larvasim {

/// Time-series sensor/actuator log. The first CSV column must be `time_s`
/// with strictly increasing values; remaining columns are matched
/// case-sensitively against the known symbol names, and unknown columns are
/// kept as opaque channels with a warning.
struct SensorLog {
    std::vector<std::string> columns;            // channel names, time excluded
    std::vector<double> time_s;
    std::vector<std::vector<double>> rows;       // one vector per sample
    std::vector<std::string> warnings;

    bool has(const std::string& name) const {
        for (const auto& c : columns)
            if (c == name) return true;
        return false;
    }

    std::vector<double> channel(const std::string& name) const {
        for (std::size_t j = 0; j < columns.size(); ++j)
            if (columns[j] == name) {
                std::vector<double> v(rows.size());
                for (std::size_t i = 0; i < rows.size(); ++i) v[i] = rows[i][j];
                return v;
            }
        throw ConfigError("sensor log has no channel '" + name + "'");
    }
};

inline const std::set<std::string>& known_log_symbols() {
    static const std::set<std::string> s = {
        "T_out", "H_out", "C_out", "O_out", "T_air", "T_med",  "H_air",  "C_air", "O_air",
        "B_med", "B_dry", "B_wet", "W_med", "N_feed", "N_exc", "T_Sigma", "B_tot", "W_chm",
        "W_hx",  "T_chm", "T_hx",
    };
    return s;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline double parse_number(const std::string& tok, std::size_t row, const std::string& col) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw ConfigError("unparseable numeric '" + tok + "' at row " + std::to_string(row) +
                          ", column " + col);
    return v;
}

}  // namespace detail

inline SensorLog load_sensor_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sensor log: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty sensor log: " + path);
    auto header = detail::split_csv_line(line);
    if (header.empty() || header[0] != "time_s")
        throw ConfigError("sensor log must start with a time_s column: " + path);

    SensorLog log;
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j].empty()) throw ConfigError("empty column name in header of " + path);
        log.columns.push_back(header[j]);
        if (!known_log_symbols().count(header[j]))
            log.warnings.push_back("unknown column '" + header[j] + "' kept as opaque channel");
    }

    std::size_t rowno = 1;
    while (std::getline(in, line)) {
        ++rowno;
        if (detail::trim(line).empty()) continue;
        auto toks = detail::split_csv_line(line);
        if (toks.size() != header.size())
            throw ConfigError("row " + std::to_string(rowno) + " has " +
                              std::to_string(toks.size()) + " fields, expected " +
                              std::to_string(header.size()) + " in " + path);
        const double t = detail::parse_number(toks[0], rowno, "time_s");
        if (!log.time_s.empty() && t <= log.time_s.back())
            throw ConfigError("non-monotone or duplicate timestamp at row " +
                              std::to_string(rowno) + " in " + path);
        log.time_s.push_back(t);
        std::vector<double> row(log.columns.size());
        for (std::size_t j = 1; j < toks.size(); ++j)
            row[j - 1] = detail::parse_number(toks[j], rowno, header[j]);
        log.rows.push_back(std::move(row));
    }
    if (log.time_s.empty()) throw ConfigError("sensor log has no data rows: " + path);
    return log;
}

/// Write a CSV table with 17 significant digits so finite doubles round-trip
/// bit-exactly.
inline void save_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ConfigError("cannot write CSV: " + path);
    for (std::size_t j = 0; j < header.size(); ++j)
        std::fprintf(f, "%s%s", header[j].c_str(), j + 1 < header.size() ? "," : "\n");
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < r.size(); ++j)
            std::fprintf(f, "%.17g%s", r[j], j + 1 < r.size() ? "," : "\n");
    }
    std::fclose(f);
}

inline void save_sensor_csv(const std::string& path, const SensorLog& log) {
    std::vector<std::string> header = {"time_s"};
    header.insert(header.end(), log.columns.begin(), log.columns.end());
    std::vector<std::vector<double>> rows(log.time_s.size());
    for (std::size_t i = 0; i < log.time_s.size(); ++i) {
        rows[i].push_back(log.time_s[i]);
        rows[i].insert(rows[i].end(), log.rows[i].begin(), log.rows[i].end());
    }
    save_csv(path, header, rows);
}

}  // namespace larvasim
