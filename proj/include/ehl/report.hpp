#pragma once

// Field dumps, CSV tables with deterministic formatting, and the config
// hash stamped into every emitted file.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehl/grid.hpp"

namespace ehl {

inline constexpr const char* artifact_version = "0.1.0";

// FNV-1a over the canonical config text
inline std::string config_hash(const std::string& text) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// 6 significant digits, scientific; matches the table precision in use.
inline std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return std::string(buf);
}

// Plain-text grid dump: header with sizes and bounds, then x y value rows,
// row-major with j outer. Values carry full precision for exact re-reads.
inline void emit_field(const Field& f, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("emit_field: cannot open '" + path + "'");
    const GridLevel& g = f.level;
    out << "# nx ny x0 y0 x1 y1\n";
    char head[160];
    std::snprintf(head, sizeof head, "%d %d %.17g %.17g %.17g %.17g\n",
                  g.nx, g.ny, g.x0, g.y0, g.x1, g.y1);
    out << head;
    char line[128];
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            std::snprintf(line, sizeof line, "%.17g %.17g %.17g\n", g.x(i), g.y(j), f(i, j));
            out << line;
        }
    if (!out)
        throw std::runtime_error("emit_field: write failed for '" + path + "'");
}

inline Field read_field(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_field: cannot open '" + path + "'");
    std::string header;
    std::getline(in, header);   // comment
    int nx, ny;
    double x0, y0, x1, y1;
    in >> nx >> ny >> x0 >> y0 >> x1 >> y1;
    Field f(make_level(x0, y0, x1, y1, nx, ny));
    double x, y, v;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (!(in >> x >> y >> v))
                throw std::runtime_error("read_field: truncated file '" + path + "'");
            f(i, j) = v;
        }
    return f;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write(const std::string& path, const std::string& cfg_hash) const {
        std::ofstream out(path);
        if (!out)
            throw std::runtime_error("CsvTable: cannot open '" + path + "'");
        out << "# artifact-version: " << artifact_version << "\n";
        out << "# config-hash: " << cfg_hash << "\n";
        for (size_t k = 0; k < header.size(); ++k)
            out << header[k] << (k + 1 < header.size() ? "," : "");
        out << "\n";
        for (const auto& row : rows) {
            for (size_t k = 0; k < row.size(); ++k)
                out << row[k] << (k + 1 < row.size() ? "," : "");
            out << "\n";
        }
        if (!out)
            throw std::runtime_error("CsvTable: write failed for '" + path + "'");
    }
};

} // namespace ehl
