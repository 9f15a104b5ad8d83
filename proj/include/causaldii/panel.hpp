#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "causaldii/errors.hpp"

namespace causaldii {

// A rectangular multivariate time series: T rows (time, oldest first) by
// D named columns. Timestamps are optional and carried as opaque strings.
struct TimeSeriesPanel {
    std::vector<std::string> names;
    std::vector<std::string> timestamps; // empty, or one per row
    Eigen::MatrixXd values;              // T x D

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    Eigen::Index column_index(const std::string& name) const {
        for (std::size_t k = 0; k < names.size(); ++k)
            if (names[k] == name) return static_cast<Eigen::Index>(k);
        throw UnknownVariableError(name);
    }

    bool has_column(const std::string& name) const {
        return std::find(names.begin(), names.end(), name) != names.end();
    }

    // Checks the structural invariants: names match the value matrix, names
    // are unique and non-empty, timestamps (if present) match the row count,
    // and every entry is finite.
    void validate() const {
        if (static_cast<Eigen::Index>(names.size()) != values.cols())
            throw DimensionMismatchError(
                "panel has " + std::to_string(names.size()) + " names but " +
                std::to_string(values.cols()) + " value columns");
        if (values.cols() < 1)
            throw DimensionMismatchError("panel needs at least one column");
        std::unordered_set<std::string> seen;
        for (const auto& n : names) {
            if (n.empty())
                throw ValidationError("panel has an empty column name");
            if (!seen.insert(n).second)
                throw ValidationError("duplicate column name '" + n + "'");
        }
        if (!timestamps.empty() &&
            static_cast<Eigen::Index>(timestamps.size()) != values.rows())
            throw DimensionMismatchError(
                "panel has " + std::to_string(timestamps.size()) +
                " timestamps but " + std::to_string(values.rows()) + " rows");
        for (Eigen::Index t = 0; t < values.rows(); ++t)
            for (Eigen::Index k = 0; k < values.cols(); ++k)
                if (!std::isfinite(values(t, k)))
                    throw NonFiniteError(static_cast<std::size_t>(t),
                                         names[static_cast<std::size_t>(k)]);
    }

    // Panel restricted to the given columns, in the given order.
    TimeSeriesPanel select(const std::vector<std::string>& wanted) const {
        TimeSeriesPanel out;
        out.timestamps = timestamps;
        out.values.resize(rows(), static_cast<Eigen::Index>(wanted.size()));
        for (std::size_t k = 0; k < wanted.size(); ++k) {
            Eigen::Index src = column_index(wanted[k]);
            out.names.push_back(wanted[k]);
            out.values.col(static_cast<Eigen::Index>(k)) = values.col(src);
        }
        return out;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace detail

struct CsvReadResult {
    TimeSeriesPanel panel;
    std::size_t dropped_rows = 0; // rows discarded because a field was empty
};

// Reads a comma-separated panel. The first line is a header of column names;
// if the first header cell is "date" (case-insensitive) that column is kept
// as timestamps. Rows with any empty field are dropped and counted; a row
// with the wrong number of fields is an error naming the offending line.
inline CsvReadResult read_csv(std::istream& in, const std::string& source = "csv") {
    std::string line;
    if (!std::getline(in, line))
        throw CsvFormatError(source + ": empty input, expected a header row");
    std::vector<std::string> header = detail::split_csv_line(line);
    for (auto& h : header) h = detail::trim(h);

    std::string first_lower = header.empty() ? "" : header[0];
    std::transform(first_lower.begin(), first_lower.end(), first_lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    const bool has_date = first_lower == "date";
    const std::size_t value_offset = has_date ? 1 : 0;
    if (header.size() <= value_offset)
        throw CsvFormatError(source + ": header has no value columns");

    CsvReadResult out;
    for (std::size_t k = value_offset; k < header.size(); ++k) {
        if (header[k].empty())
            throw CsvFormatError(source + ": empty name in header column " +
                                 std::to_string(k + 1));
        out.panel.names.push_back(header[k]);
    }

    std::vector<double> buffer;
    std::vector<std::string> stamps;
    std::size_t line_no = 1;
    std::vector<double> row(out.panel.names.size());
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw CsvFormatError(source + ": line " + std::to_string(line_no) +
                                 " has " + std::to_string(fields.size()) +
                                 " fields, expected " +
                                 std::to_string(header.size()));
        bool missing = false;
        for (const auto& f : fields)
            if (detail::trim(f).empty()) { missing = true; break; }
        if (missing) {
            ++out.dropped_rows;
            continue;
        }
        for (std::size_t k = 0; k < row.size(); ++k) {
            const std::string f = detail::trim(fields[k + value_offset]);
            char* end = nullptr;
            double v = std::strtod(f.c_str(), &end);
            if (end == f.c_str() || *end != '\0')
                throw CsvFormatError(source + ": line " + std::to_string(line_no) +
                                     ", column '" + out.panel.names[k] +
                                     "': cannot parse '" + f + "' as a number");
            if (!std::isfinite(v))
                throw NonFiniteError(line_no - 1, out.panel.names[k]);
            row[k] = v;
        }
        buffer.insert(buffer.end(), row.begin(), row.end());
        if (has_date) stamps.push_back(detail::trim(fields[0]));
    }

    const std::size_t d = out.panel.names.size();
    const std::size_t t = buffer.size() / d;
    out.panel.values.resize(static_cast<Eigen::Index>(t),
                            static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t k = 0; k < d; ++k)
            out.panel.values(static_cast<Eigen::Index>(i),
                             static_cast<Eigen::Index>(k)) = buffer[i * d + k];
    if (has_date) out.panel.timestamps = std::move(stamps);
    out.panel.validate();
    return out;
}

inline CsvReadResult read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "' for reading");
    return read_csv(in, path);
}

// Shortest round-trip decimal form of a double: "%.17g" re-parses to the
// exact same bits, so written panels reload without drift.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline void write_csv(std::ostream& out, const TimeSeriesPanel& panel) {
    const bool has_date = !panel.timestamps.empty();
    if (has_date) out << "date";
    for (std::size_t k = 0; k < panel.names.size(); ++k) {
        if (has_date || k > 0) out << ',';
        out << panel.names[k];
    }
    out << '\n';
    for (Eigen::Index t = 0; t < panel.rows(); ++t) {
        if (has_date) out << panel.timestamps[static_cast<std::size_t>(t)];
        for (Eigen::Index k = 0; k < panel.cols(); ++k) {
            if (has_date || k > 0) out << ',';
            out << format_double(panel.values(t, k));
        }
        out << '\n';
    }
}

inline void write_csv_file(const std::string& path, const TimeSeriesPanel& panel) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    write_csv(out, panel);
}

} // namespace causaldii
