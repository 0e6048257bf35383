#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmotv/signal.hpp"
#include "gmotv/structure.hpp"

namespace gmotv {

/// Load a 1D signal from plain text or CSV: one sample per line, first
/// numeric column used (or the second, when the first column is an index),
/// '#'-prefixed comment lines and blank lines skipped.
inline Signal load_signal(const std::string& path, bool first_column_is_index = false) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_signal: cannot open '" + path + "'");
    std::vector<double> samples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;

        std::vector<std::string> fields;
        {
            std::string cur;
            for (char c : line) {
                if (c == ',' || c == ' ' || c == '\t' || c == ';') {
                    if (!cur.empty()) fields.push_back(cur);
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            if (!cur.empty()) fields.push_back(cur);
        }
        const std::size_t want = first_column_is_index ? 1 : 0;
        if (fields.size() <= want)
            throw std::runtime_error("load_signal: " + path + ":" + std::to_string(lineno) +
                                     ": missing value column");
        const std::string& tok = fields[want];
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            samples.push_back(v);
        } catch (const std::exception&) {
            throw std::runtime_error("load_signal: " + path + ":" + std::to_string(lineno) +
                                     ": non-numeric value '" + tok + "'");
        }
    }
    if (samples.empty()) throw std::runtime_error("load_signal: '" + path + "' has no samples");
    return Signal(std::move(samples));
}

inline void save_signal(const std::string& path, const Signal& s) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_signal: cannot open '" + path + "' for writing");
    char buf[40];
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.16e", s[i]);
        out << buf << "\n";
    }
    if (!out) throw std::runtime_error("save_signal: write failed for '" + path + "'");
}

inline void save_structure(const std::string& path, const StructureMatrix& s) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_structure: cannot open '" + path + "' for writing");
    write_structure(out, s);
    if (!out) throw std::runtime_error("save_structure: write failed for '" + path + "'");
}

inline StructureMatrix load_structure(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_structure: cannot open '" + path + "'");
    return read_structure(in);
}

}  // namespace gmotv
