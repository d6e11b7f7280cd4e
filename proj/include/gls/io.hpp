#pragma once
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>
#include "model.hpp"

// Plain CSV for designs, responses, group sizes and coefficients.
// Doubles are written with 17 significant digits so they read back exactly.

namespace gls::io {

class MalformedInput : public InvalidInput
{
public:
    using InvalidInput::InvalidInput;
};

inline std::string format_double(double value)
{
    std::ostringstream out;
    out << std::setprecision(std::numeric_limits<double>::max_digits10) << value;
    return out.str();
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view field, std::size_t line)
{
    field = trim(field);
    std::string text(field);
    char* end = nullptr;
    const double value = text.empty() ? 0.0 : std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(value)) {
        throw MalformedInput("line " + std::to_string(line) + ": cannot parse number '" + text + "'");
    }
    return value;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',')
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Numeric CSV without header; blank lines are skipped.
inline std::vector<std::vector<double>> read_rows(std::istream& in)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<double> row;
        for (auto field : split(line)) row.push_back(parse_double(field, lineno));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw MalformedInput("cannot open " + path);
    return in;
}

inline std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

inline Matrix read_matrix(std::istream& in)
{
    const auto rows = read_rows(in);
    if (rows.empty()) throw MalformedInput("matrix file is empty");
    const std::size_t cols = rows.front().size();
    Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw MalformedInput("ragged matrix row " + std::to_string(i + 1));
        for (std::size_t j = 0; j < cols; ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
    return out;
}

inline Vector read_vector(std::istream& in)
{
    const auto rows = read_rows(in);
    if (rows.empty()) throw MalformedInput("vector file is empty");
    Vector out(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != 1) throw MalformedInput("response file must have a single column");
        out(static_cast<Index>(i)) = rows[i][0];
    }
    return out;
}

/// One line of comma-separated positive integers.
inline GroupPartition read_groups(std::istream& in)
{
    std::string line;
    while (std::getline(in, line) && trim(line).empty()) {}
    if (trim(line).empty()) throw MalformedInput("group file is empty");
    std::vector<Index> sizes;
    for (auto field : split(line)) {
        field = trim(field);
        long long value = 0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
        if (ec != std::errc() || ptr != field.data() + field.size() || value < 1) {
            throw MalformedInput("group sizes must be positive integers, got '" + std::string(field) + "'");
        }
        sizes.push_back(static_cast<Index>(value));
    }
    return GroupPartition(std::move(sizes));
}

inline void write_matrix(std::ostream& out, const Matrix& m)
{
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
        out << '\n';
    }
}

inline void write_vector(std::ostream& out, const Vector& v)
{
    for (Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << '\n';
}

inline void write_groups(std::ostream& out, const GroupPartition& groups)
{
    for (Index k = 0; k < groups.num_groups(); ++k) out << (k ? "," : "") << groups.size(k);
    out << '\n';
}

/// Header `group,index,value`; group and index are 1-based.
inline void write_coefficients(std::ostream& out, const Coefficients& beta)
{
    out << "group,index,value\n";
    for (Index k = 0; k < beta.num_groups(); ++k) {
        const auto g = beta.group(k);
        for (Index j = 0; j < g.size(); ++j) out << k + 1 << ',' << j + 1 << ',' << format_double(g(j)) << '\n';
    }
}

/// Inverse of write_coefficients; rows must be in group-major order.
inline Coefficients read_coefficients(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || trim(line) != "group,index,value") {
        throw MalformedInput("coefficient file must start with 'group,index,value'");
    }
    std::vector<Index> sizes;
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (fields.size() != 3) throw MalformedInput("line " + std::to_string(lineno) + ": expected 3 fields");
        const auto group = static_cast<Index>(parse_double(fields[0], lineno));
        const auto index = static_cast<Index>(parse_double(fields[1], lineno));
        if (group == static_cast<Index>(sizes.size()) + 1 && index == 1) {
            sizes.push_back(1);
        } else if (!sizes.empty() && group == static_cast<Index>(sizes.size()) && index == sizes.back() + 1) {
            ++sizes.back();
        } else {
            throw MalformedInput("line " + std::to_string(lineno) + ": coefficients out of order");
        }
        values.push_back(parse_double(fields[2], lineno));
    }
    if (sizes.empty()) throw MalformedInput("coefficient file has no rows");
    return Coefficients(Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size())),
                        GroupPartition(std::move(sizes)));
}

} // namespace gls::io
