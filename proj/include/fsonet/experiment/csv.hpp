#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "fsonet/errors.hpp"

namespace fsonet::experiment {

inline constexpr const char* kArtifactVersion = "fsonet 0.1.0";

/// Locale-independent shortest round-trip-ish formatting; NaN prints as "nan".
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// Header, rows of cells and '#'-prefixed footer lines.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
        if (header_.empty()) throw DomainError("CsvTable: empty header");
    }

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }
    const std::vector<std::string>& footer() const { return footer_; }

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != header_.size()) throw DomainError("CsvTable: row width differs from header");
        rows_.push_back(std::move(cells));
    }

    void add_numeric_row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        for (double v : values) cells.push_back(format_number(v));
        add_row(std::move(cells));
    }

    void add_footer(const std::string& line) { footer_.push_back(line); }

    void write(std::ostream& out) const {
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
            out << '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        for (const auto& f : footer_) out << "# " << f << '\n';
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::string> footer_;
};

/// Write to a sibling temporary file and rename into place, so a failed
/// run never leaves a partial file at `path`.
inline void write_atomically(const CsvTable& table, const std::filesystem::path& path) {
    auto tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("--out", "cannot write '" + tmp.string() + "'");
        table.write(out);
        out.flush();
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw ConfigError("--out", "write failed for '" + path.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace fsonet::experiment
