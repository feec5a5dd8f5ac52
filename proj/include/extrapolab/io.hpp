#pragma once

// CSV formats: step functions as `level,cells` header plus one value per
// line, sparse collections as one row per cube. Leading '#' lines carry
// provenance and are skipped on read.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "extrapolab/dyadic.hpp"
#include "extrapolab/sparse.hpp"

namespace extrapolab {

inline constexpr const char* kVersion = "0.1.0";

inline std::string provenance_line(unsigned long long seed, int level) {
    std::ostringstream os;
    os << "# extrapolab v" << kVersion << ", seed=" << seed << ", L=" << level;
    return os.str();
}

struct CsvError : std::runtime_error {
    explicit CsvError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline bool next_data_line(std::istream& in, std::string& line, int& lineno) {
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        return true;
    }
    return false;
}

[[noreturn]] inline void parse_fail(const std::string& what, int lineno) {
    throw CsvError("line " + std::to_string(lineno) + ": " + what);
}

}  // namespace detail

inline void write_step(std::ostream& out, const StepFunction& f, const std::string& provenance = "") {
    if (!provenance.empty()) out << provenance << "\n";
    out << "level,cells\n" << f.level() << "," << f.cells() << "\n";
    out << std::setprecision(17);
    for (cell_t i = 0; i < f.cells(); ++i) out << f[i] << "\n";
}

inline void write_step_file(const std::string& path, const StepFunction& f,
                            const std::string& provenance = "") {
    std::ofstream out(path);
    if (!out) throw CsvError("cannot open " + path);
    write_step(out, f, provenance);
}

inline StepFunction read_step(std::istream& in) {
    std::string line;
    int lineno = 0;
    if (!detail::next_data_line(in, line, lineno)) detail::parse_fail("missing header", lineno);
    if (line != "level,cells") detail::parse_fail("expected `level,cells` header, got `" + line + "`", lineno);
    if (!detail::next_data_line(in, line, lineno)) detail::parse_fail("missing dimensions", lineno);
    int level = 0;
    long long cells = 0;
    {
        std::istringstream ls(line);
        char comma = 0;
        if (!(ls >> level >> comma >> cells) || comma != ',')
            detail::parse_fail("bad dimension row `" + line + "`", lineno);
    }
    if (level < 0 || level > 30 || cells != (1LL << level))
        detail::parse_fail("cells must equal 2^level", lineno);
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(cells));
    for (long long i = 0; i < cells; ++i) {
        if (!detail::next_data_line(in, line, lineno)) detail::parse_fail("missing value row", lineno);
        std::istringstream ls(line);
        double x = 0.0;
        if (!(ls >> x)) detail::parse_fail("bad value `" + line + "`", lineno);
        vals.push_back(x);
    }
    return StepFunction(level, std::move(vals));
}

inline StepFunction read_step_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open " + path);
    try {
        return read_step(in);
    } catch (const CsvError& e) {
        throw CsvError(path + ": " + e.what());
    }
}

inline void write_sparse(std::ostream& out, const SparseCollection& s,
                         const std::string& provenance = "") {
    if (!provenance.empty()) out << provenance << "\n";
    out << "grid,level,index,k,E_cells\n";
    for (const SparseEntry& e : s.entries) {
        out << e.cube.grid << "," << e.cube.level << "," << e.cube.index << "," << e.k << ",";
        for (std::size_t i = 0; i < e.e_cells.size(); ++i) {
            if (i) out << ";";
            out << e.e_cells[i];
        }
        out << "\n";
    }
}

inline SparseCollection read_sparse(std::istream& in, int level) {
    SparseCollection s;
    s.level = level;
    std::string line;
    int lineno = 0;
    if (!detail::next_data_line(in, line, lineno)) detail::parse_fail("missing header", lineno);
    if (line != "grid,level,index,k,E_cells")
        detail::parse_fail("expected sparse header, got `" + line + "`", lineno);
    while (detail::next_data_line(in, line, lineno)) {
        SparseEntry e;
        std::istringstream ls(line);
        std::string tok;
        auto next_int = [&](const char* name) {
            if (!std::getline(ls, tok, ',')) detail::parse_fail(std::string("missing ") + name, lineno);
            return std::stoll(tok);
        };
        e.cube.grid = static_cast<int>(next_int("grid"));
        e.cube.level = static_cast<int>(next_int("level"));
        e.cube.index = next_int("index");
        e.k = static_cast<int>(next_int("k"));
        e.cells = cube_cells(e.cube, level);
        e.is_root = e.cube.level == 0;
        if (std::getline(ls, tok)) {
            std::istringstream cs(tok);
            std::string c;
            while (std::getline(cs, c, ';'))
                if (!c.empty()) e.e_cells.push_back(std::stoll(c));
        }
        s.entries.push_back(std::move(e));
    }
    return s;
}

}  // namespace extrapolab
