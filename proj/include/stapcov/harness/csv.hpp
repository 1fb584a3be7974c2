#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "stapcov/simulator.hpp"

namespace stapcov::harness {

/// Provenance written as '#' comment lines at the top of every output file.
struct FileHeader {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string description;
};

inline std::string header_text(const FileHeader& h) {
    std::ostringstream o;
    o << "# stapcov " << kVersion << "\n"
      << "# config_hash=" << h.config_hash << " seed=" << h.seed << "\n";
    if (!h.description.empty()) o << "# " << h.description << "\n";
    return o.str();
}

/// Fixed-point formatting with `decimals` places; "-inf"/"inf"/"nan" spelled out.
inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline std::string full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes the whole file at once; throws on failure.
inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write output file '" + path.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("failed writing output file '" + path.string() + "'");
}

/// Numeric CSV table: '#' comments skipped, an optional non-numeric first row taken as column names.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    double number(std::size_t row, std::size_t col) const { return std::stod(rows.at(row).at(col)); }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    return out;
}

inline CsvTable read_csv(const std::filesystem::path& path, bool has_column_row = true) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open CSV file '" + path.string() + "'");
    CsvTable t;
    bool first = true;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#' || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (first && has_column_row) {
            t.columns = std::move(cells);
        } else {
            t.rows.push_back(std::move(cells));
        }
        first = false;
    }
    return t;
}

/// Snapshot CSV: one row per snapshot, 2p columns re_0,im_0,re_1,im_1,...
inline std::string snapshots_to_csv(const SnapshotSet& data, const FileHeader& header) {
    std::ostringstream o;
    o << header_text(header) << "# snapshots=" << data.count() << " dimension=" << data.dimension()
      << " mode=" << to_string(data.mode) << " snapshot_seed=" << data.seed << "\n";
    for (Eigen::Index k = 0; k < data.count(); ++k) {
        for (Eigen::Index i = 0; i < data.dimension(); ++i) {
            if (i) o << ',';
            o << full_precision(data.X(i, k).real()) << ',' << full_precision(data.X(i, k).imag());
        }
        o << '\n';
    }
    return o.str();
}

inline SnapshotSet read_snapshots_csv(const std::filesystem::path& path, Eigen::Index expected_dimension) {
    const CsvTable t = read_csv(path, false);
    SnapshotSet out;
    out.X.resize(expected_dimension, static_cast<Eigen::Index>(t.rows.size()));
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto& row = t.rows[k];
        if (row.size() != static_cast<std::size_t>(2 * expected_dimension))
            throw Error(path.string() + ": snapshot row " + std::to_string(k + 1) + " has " + std::to_string(row.size()) +
                        " values, expected " + std::to_string(2 * expected_dimension));
        for (Eigen::Index i = 0; i < expected_dimension; ++i) {
            try {
                out.X(i, static_cast<Eigen::Index>(k)) = {std::stod(row[static_cast<std::size_t>(2 * i)]),
                                                          std::stod(row[static_cast<std::size_t>(2 * i + 1)])};
            } catch (const std::exception&) {
                throw Error(path.string() + ": snapshot row " + std::to_string(k + 1) + " has a non-numeric value");
            }
        }
    }
    return out;
}

/// Complex matrix CSV: one row per matrix row, interleaved re,im.
inline std::string matrix_to_csv(const CMatrix& m, const FileHeader& header) {
    std::ostringstream o;
    o << header_text(header);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) o << ',';
            o << full_precision(m(i, j).real()) << ',' << full_precision(m(i, j).imag());
        }
        o << '\n';
    }
    return o.str();
}

}  // namespace stapcov::harness
