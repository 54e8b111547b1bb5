#pragma once

// Plain-text interchange: CSV tables with `#` comment headers, 17
// significant digits, written atomically (temporary file + rename).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hpns/errors.hpp"
#include "hpns/field.hpp"
#include "hpns/grid.hpp"
#include "hpns/numerics.hpp"

namespace hpns::io {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Comment lines naming the transform convention, followed by `config`
/// (one `key=value` per line).
inline std::string preamble(const std::string& config) {
    std::ostringstream os;
    os << "# transform: f(x) = int exp(i k x) fhat(k) dk\n";
    os << "# two_pi=" << fmt(two_pi) << "\n";
    std::istringstream in(config);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) os << "# " << line << "\n";
    return os.str();
}

class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    template <typename... T>
    void row(T... v) {
        static_assert(sizeof...(T) > 0);
        std::vector<double> r{static_cast<double>(v)...};
        add(std::move(r));
    }
    void add(std::vector<double> r) {
        if (r.size() != columns_.size()) throw ValidationError("Table: row width does not match header");
        rows_.push_back(std::move(r));
    }

    std::size_t size() const { return rows_.size(); }

    std::string str(const std::string& config = {}) const {
        std::ostringstream os;
        os << preamble(config);
        for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
        os << "\n";
        for (const auto& r : rows_) {
            for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << fmt(r[c]);
            os << "\n";
        }
        return os.str();
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
        f << content;
        f.flush();
        if (!f) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename onto " + path.string());
    }
}

struct CsvData {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> comments;

    std::size_t column(const std::string& name) const {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw ValidationError("CSV: missing column '" + name + "'");
        return static_cast<std::size_t>(it - columns.begin());
    }
};

inline CsvData parse_csv(std::istream& in, const std::string& what) {
    CsvData d;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            d.comments.push_back(line.size() > 2 ? line.substr(2) : "");
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (d.columns.empty()) {
            d.columns = cells;
            continue;
        }
        if (cells.size() != d.columns.size()) throw ValidationError(what + ": ragged row");
        std::vector<double> r(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            try {
                std::size_t used = 0;
                r[c] = std::stod(cells[c], &used);
                if (used != cells[c].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ValidationError(what + ": malformed number '" + cells[c] + "'");
            }
        }
        d.rows.push_back(std::move(r));
    }
    if (d.columns.empty()) throw ValidationError(what + ": no header row");
    return d;
}

inline CsvData read_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    return parse_csv(f, path.string());
}

inline std::string field_csv(const KGrid& kg, const YGrid& yg, const SpectralField& f, const std::string& config) {
    Table t({"k", "y", "re", "im"});
    for (std::size_t i = 0; i < kg.size(); ++i)
        for (std::size_t j = 0; j < yg.size(); ++j) t.row(kg[i], yg[j], f(i, j).real(), f(i, j).imag());
    return t.str(config);
}

inline std::string trace_csv(const KGrid& kg, const BoundaryTrace& b, const std::string& config) {
    Table t({"k", "re", "im"});
    for (std::size_t i = 0; i < kg.size(); ++i) t.row(kg[i], b[i].real(), b[i].imag());
    return t.str(config);
}

namespace detail {

inline KGrid kgrid_from_values(std::vector<double> ks, const std::string& what) {
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    std::vector<double> pos;
    bool zero = false;
    for (double k : ks) {
        if (k > 0.0) pos.push_back(k);
        if (k == 0.0) zero = true;
    }
    KGrid kg = KGrid::from_positive(pos, zero);
    if (kg.size() != ks.size()) throw ValidationError(what + ": k values are not symmetric about 0");
    for (std::size_t i = 0; i < ks.size(); ++i)
        if (kg[i] != ks[i]) throw ValidationError(what + ": k values are not symmetric about 0");
    return kg;
}

inline std::size_t find_node(std::span<const double> nodes, double v, const std::string& what) {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), v);
    if (it == nodes.end() || *it != v) throw ValidationError(what + ": sample off the grid");
    return static_cast<std::size_t>(it - nodes.begin());
}

}  // namespace detail

struct FieldData {
    KGrid kgrid;
    YGrid ygrid;
    SpectralField field;
};

/// Reads a `k,y,re,im` table; the grids are the distinct k and y values,
/// and every (k, y) pair must be present.
inline FieldData read_field(const std::filesystem::path& path) {
    const auto d = read_csv(path);
    const std::size_t ck = d.column("k"), cy = d.column("y"), cr = d.column("re"), ci = d.column("im");
    std::vector<double> ks, ys;
    for (const auto& r : d.rows) ks.push_back(r[ck]), ys.push_back(r[cy]);
    KGrid kg = detail::kgrid_from_values(ks, path.string());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    if (d.rows.size() != kg.size() * ys.size()) throw ValidationError(path.string() + ": field is not a full tensor grid");
    YGrid yg(ys);
    SpectralField f(kg.size(), yg.size());
    for (const auto& r : d.rows)
        f(detail::find_node(kg.modes(), r[ck], path.string()), detail::find_node(yg.nodes(), r[cy], path.string())) =
            cplx(r[cr], r[ci]);
    return {std::move(kg), std::move(yg), std::move(f)};
}

/// Reads a `k,re,im` table sampled on exactly the nodes of `kg`.
inline BoundaryTrace read_trace(const std::filesystem::path& path, const KGrid& kg) {
    const auto d = read_csv(path);
    const std::size_t ck = d.column("k"), cr = d.column("re"), ci = d.column("im");
    if (d.rows.size() != kg.size()) throw ValidationError(path.string() + ": trace does not match the k-grid");
    BoundaryTrace t(kg.size());
    for (const auto& r : d.rows) t[detail::find_node(kg.modes(), r[ck], path.string())] = cplx(r[cr], r[ci]);
    return t;
}

/// Reads a `k,re,im` table and the k-grid it is sampled on.
inline std::pair<KGrid, BoundaryTrace> read_trace(const std::filesystem::path& path) {
    const auto d = read_csv(path);
    std::vector<double> ks;
    for (const auto& r : d.rows) ks.push_back(r[d.column("k")]);
    KGrid kg = detail::kgrid_from_values(ks, path.string());
    BoundaryTrace t = read_trace(path, kg);
    return {std::move(kg), std::move(t)};
}

}  // namespace hpns::io
