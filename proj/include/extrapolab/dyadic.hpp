#pragma once

// Discrete dyadic model on [0,1): cells of width 2^-L, the standard grid
// plus two lattice-rounded 1/3-shifted grids, cell-constant functions with
// prefix-sum averages, and an analytic power-law field for exact averages
// of c*x^b.
//
// Dimension is fixed to n = 1, so the classical grid constants specialize
// to 3 grids and covering ratio 6. The shifted grids are clipped to [0,1):
// cubes that stick out of the ambient interval do not exist, which makes
// coverage near the boundary best-effort (reported, never wrapped around).

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "extrapolab/recip.hpp"

namespace extrapolab {

using cell_t = std::int64_t;

inline cell_t cells_at_level(int level) { return cell_t{1} << level; }

// grid offsets in cells at resolution L; grids 1/2 shift by ~+-1/3
inline cell_t grid_offset(int grid, int L) {
    const cell_t third = (cells_at_level(L) + 1) / 3;  // round(2^L / 3)
    switch (grid) {
        case 0: return 0;
        case 1: return third;
        case 2: return -third;
        default: throw std::invalid_argument("grid must be 0, 1 or 2");
    }
}

// cube (grid, level k, index i) covering cells [i*2^(L-k)+off, (i+1)*2^(L-k)+off)
struct DyadicCube {
    int grid = 0;
    int level = 0;
    cell_t index = 0;
};

struct CellRange {
    cell_t lo = 0;
    cell_t hi = 0;  // half-open
    cell_t size() const { return hi - lo; }
};

inline CellRange cube_cells(const DyadicCube& q, int L) {
    const cell_t span = cells_at_level(L - q.level);
    const cell_t off = grid_offset(q.grid, L);
    return {q.index * span + off, (q.index + 1) * span + off};
}

inline bool cube_valid(const DyadicCube& q, int L) {
    if (q.level < 0 || q.level > L) return false;
    const CellRange c = cube_cells(q, L);
    return c.lo >= 0 && c.hi <= cells_at_level(L);
}

inline DyadicCube parent(const DyadicCube& q, int L) {
    DyadicCube up{q.grid, q.level - 1, q.index >= 0 ? q.index / 2 : (q.index - 1) / 2};
    if (q.level == 0 || !cube_valid(up, L)) throw std::domain_error("no ancestor");
    return up;
}

inline std::pair<DyadicCube, DyadicCube> children(const DyadicCube& q) {
    return {DyadicCube{q.grid, q.level + 1, 2 * q.index},
            DyadicCube{q.grid, q.level + 1, 2 * q.index + 1}};
}

inline cell_t ceil_div(cell_t a, cell_t b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }

// first valid cube index of a grid at the given level (indexes may be negative)
inline cell_t first_cube_index(int grid, int level, int L) {
    const cell_t span = cells_at_level(L - level);
    return ceil_div(-grid_offset(grid, L), span);
}

// all valid cubes of one grid down to maxLevel, coarse levels first
inline std::vector<DyadicCube> cubes(int grid, int maxLevel, int L) {
    std::vector<DyadicCube> out;
    const cell_t off = grid_offset(grid, L);
    for (int k = 0; k <= maxLevel; ++k) {
        const cell_t span = cells_at_level(L - k);
        for (cell_t i = first_cube_index(grid, k, L); (i + 1) * span + off <= cells_at_level(L); ++i)
            out.push_back({grid, k, i});
    }
    return out;
}

// which cube family a supremum ranges over
enum class GridFamily { dyadic, three_grid };

inline std::vector<int> family_grids(GridFamily f) {
    return f == GridFamily::dyadic ? std::vector<int>{0} : std::vector<int>{0, 1, 2};
}

// Cell-constant nonnegative function at resolution L. Prefix sums of
// values^t are cached per requested power t (long double accumulation so
// cube averages match direct summation well below 1e-12).
class StepFunction {
  public:
    StepFunction() = default;
    StepFunction(int level, std::vector<double> values) : level_(level), v_(std::move(values)) {
        if (static_cast<cell_t>(v_.size()) != cells_at_level(level_))
            throw std::invalid_argument("value count must be 2^level");
    }

    static StepFunction constant(int level, double c) {
        return StepFunction(level, std::vector<double>(cells_at_level(level), c));
    }

    int level() const { return level_; }
    cell_t cells() const { return static_cast<cell_t>(v_.size()); }
    const std::vector<double>& values() const { return v_; }
    double operator[](cell_t i) const { return v_[static_cast<std::size_t>(i)]; }

    // L^t average over a cell range; t = infinity means the max
    double avg(double t, CellRange c) const {
        if (c.size() <= 0) throw std::invalid_argument("empty range");
        if (std::isinf(t)) return max_on(c);
        const auto& pre = prefix(t);
        const long double s = pre[static_cast<std::size_t>(c.hi)] - pre[static_cast<std::size_t>(c.lo)];
        return static_cast<double>(std::pow(s / static_cast<long double>(c.size()), 1.0L / t));
    }

    double max_on(CellRange c) const {
        double m = 0.0;
        for (cell_t i = c.lo; i < c.hi; ++i) m = std::max(m, v_[static_cast<std::size_t>(i)]);
        return m;
    }

    double min_on(CellRange c) const {
        double m = std::numeric_limits<double>::infinity();
        for (cell_t i = c.lo; i < c.hi; ++i) m = std::min(m, v_[static_cast<std::size_t>(i)]);
        return m;
    }

    // integral of f^t over the range (cell width folded in)
    double mass_pow(double t, CellRange c) const {
        if (std::isinf(t)) throw std::invalid_argument("mass_pow needs finite t");
        const auto& pre = prefix(t);
        const long double s = pre[static_cast<std::size_t>(c.hi)] - pre[static_cast<std::size_t>(c.lo)];
        return static_cast<double>(s / static_cast<long double>(cells()));
    }

    const std::vector<long double>& prefix(double t) const {
        auto it = cache_.find(t);
        if (it != cache_.end()) return it->second;
        std::vector<long double> pre(v_.size() + 1, 0.0L);
        for (std::size_t i = 0; i < v_.size(); ++i)
            pre[i + 1] = pre[i] + static_cast<long double>(t == 1.0 ? v_[i] : std::pow(v_[i], t));
        return cache_.emplace(t, std::move(pre)).first->second;
    }

  private:
    int level_ = 0;
    std::vector<double> v_;
    mutable std::map<double, std::vector<long double>> cache_;
};

inline void require_same_level(const StepFunction& a, const StepFunction& b) {
    if (a.level() != b.level()) throw std::invalid_argument("level mismatch");
}

inline StepFunction pointwise(const StepFunction& a, const StepFunction& b,
                              double (*op)(double, double)) {
    require_same_level(a, b);
    std::vector<double> out(a.values().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a.values()[i], b.values()[i]);
    return StepFunction(a.level(), std::move(out));
}

inline StepFunction mul(const StepFunction& a, const StepFunction& b) {
    return pointwise(a, b, [](double x, double y) { return x * y; });
}

inline StepFunction div(const StepFunction& a, const StepFunction& b) {
    return pointwise(a, b, [](double x, double y) { return x / y; });
}

inline StepFunction cellpow(const StepFunction& a, double e) {
    std::vector<double> out(a.values().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::pow(a.values()[i], e);
    return StepFunction(a.level(), std::move(out));
}

inline StepFunction scale(const StepFunction& a, double c) {
    std::vector<double> out(a.values().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * a.values()[i];
    return StepFunction(a.level(), std::move(out));
}

// ||f * u||_{L^t} on [0,1); t = infinity is the cell max of f*u
inline double norm_weighted(const StepFunction& f, const StepFunction& u, double t) {
    require_same_level(f, u);
    const cell_t n = f.cells();
    if (std::isinf(t)) {
        double m = 0.0;
        for (cell_t i = 0; i < n; ++i) m = std::max(m, f[i] * u[i]);
        return m;
    }
    long double s = 0.0L;
    for (cell_t i = 0; i < n; ++i) s += std::pow(static_cast<long double>(f[i] * u[i]), static_cast<long double>(t));
    return static_cast<double>(std::pow(s / static_cast<long double>(n), 1.0L / static_cast<long double>(t)));
}

inline double norm_lp(const StepFunction& f, double t) {
    return norm_weighted(f, StepFunction::constant(f.level(), 1.0), t);
}

inline double pairing(const StepFunction& f, const StepFunction& g) {
    require_same_level(f, g);
    long double s = 0.0L;
    for (cell_t i = 0; i < f.cells(); ++i) s += static_cast<long double>(f[i]) * g[i];
    return static_cast<double>(s / static_cast<long double>(f.cells()));
}

// Analytic field c * x^b on [0,1), resolved on the level-L lattice. All
// averages are exact continuum integrals, so the blow-up of the first cell
// is captured without sampling error.
class PowerField {
  public:
    PowerField(int level, double coeff, double expnt)
        : level_(level), c_(coeff), b_(expnt) {
        if (!(coeff > 0.0)) throw std::invalid_argument("power field needs c > 0");
    }

    int level() const { return level_; }
    double coeff() const { return c_; }
    double expnt() const { return b_; }

    PowerField pow(double e) const { return PowerField(level_, std::pow(c_, e), b_ * e); }
    PowerField mul(const PowerField& o) const {
        return PowerField(level_, c_ * o.c_, b_ + o.b_);
    }

    // exact L^t average of c*x^b over a cell range
    double avg(double t, CellRange cr) const {
        if (std::isinf(t)) return max_on(cr);
        const double bt = b_ * t;
        if (!(bt > -1.0)) throw std::domain_error("non-integrable power");
        const double x0 = static_cast<double>(cr.lo) / static_cast<double>(cells_at_level(level_));
        const double x1 = static_cast<double>(cr.hi) / static_cast<double>(cells_at_level(level_));
        const double mean = (std::pow(x1, bt + 1.0) - std::pow(x0, bt + 1.0)) / ((bt + 1.0) * (x1 - x0));
        return c_ * std::pow(mean, 1.0 / t);
    }

    double max_on(CellRange cr) const {
        const double x0 = static_cast<double>(cr.lo) / static_cast<double>(cells_at_level(level_));
        const double x1 = static_cast<double>(cr.hi) / static_cast<double>(cells_at_level(level_));
        if (b_ >= 0.0) return c_ * std::pow(x1, b_);
        if (x0 == 0.0) throw std::domain_error("non-integrable power");  // esssup infinite
        return c_ * std::pow(x0, b_);
    }

    // integral of (c x^b)^t over the range
    double mass_pow(double t, CellRange cr) const {
        const double bt = b_ * t;
        if (!(bt > -1.0)) throw std::domain_error("non-integrable power");
        const double x0 = static_cast<double>(cr.lo) / static_cast<double>(cells_at_level(level_));
        const double x1 = static_cast<double>(cr.hi) / static_cast<double>(cells_at_level(level_));
        return std::pow(c_, t) * (std::pow(x1, bt + 1.0) - std::pow(x0, bt + 1.0)) / (bt + 1.0);
    }

    // cell-averaged step discretization (L^1 means per cell)
    StepFunction discretize() const {
        const cell_t n = cells_at_level(level_);
        std::vector<double> v(static_cast<std::size_t>(n));
        for (cell_t i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = avg(1.0, {i, i + 1});
        return StepFunction(level_, std::move(v));
    }

  private:
    int level_;
    double c_;
    double b_;
};

// ||f * u||_{L^t} for a step f against an analytic weight u
inline double norm_weighted(const StepFunction& f, const PowerField& u, double t) {
    if (f.level() != u.level()) throw std::invalid_argument("level mismatch");
    const cell_t n = f.cells();
    if (std::isinf(t)) {
        double m = 0.0;
        for (cell_t i = 0; i < n; ++i) m = std::max(m, f[i] * u.max_on({i, i + 1}));
        return m;
    }
    long double s = 0.0L;
    for (cell_t i = 0; i < n; ++i)
        s += std::pow(static_cast<long double>(f[i]), static_cast<long double>(t)) *
             static_cast<long double>(u.mass_pow(t, {i, i + 1}));
    return static_cast<double>(std::pow(s, 1.0L / static_cast<long double>(t)));
}

// exact ||c x^(b1) * u||_{L^t} over [0,1) when u is also a power field
inline double norm_weighted(const PowerField& f, const PowerField& u, double t) {
    const PowerField g = f.mul(u);
    if (std::isinf(t)) return g.max_on({0, cells_at_level(g.level())});
    return std::pow(g.mass_pow(t, {0, cells_at_level(g.level())}), 1.0 / t);
}

// Smallest cube among the three grids containing the lattice interval I.
// Returns nothing when clipping near the boundary leaves no cover; the
// classical shift argument makes the covering ratio at most 6 elsewhere.
inline std::optional<DyadicCube> three_grid_cover(CellRange I, int L) {
    if (I.lo < 0 || I.hi > cells_at_level(L) || I.size() <= 0)
        throw std::invalid_argument("interval outside the ambient lattice");
    for (int k = L; k >= 0; --k) {
        const cell_t span = cells_at_level(L - k);
        if (span < I.size()) continue;
        for (int g = 0; g < 3; ++g) {
            const cell_t off = grid_offset(g, L);
            cell_t i = I.lo - off >= 0 ? (I.lo - off) / span : -(((off - I.lo) + span - 1) / span);
            const DyadicCube q{g, k, i};
            if (!cube_valid(q, L)) continue;
            const CellRange c = cube_cells(q, L);
            if (c.lo <= I.lo && I.hi <= c.hi) return q;
        }
    }
    return std::nullopt;
}

}  // namespace extrapolab
