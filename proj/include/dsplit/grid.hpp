#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dsplit/errors.hpp"

namespace dsplit {

using Point = std::array<double, 3>;
using Index3 = std::array<int, 3>;

/// Uniform Cartesian MAC grid on [0, L_x] x [0, L_y] (x [0, L_z]).
///
/// Unused axes of a 2D grid carry n = 1, h = 1 so that 3-index loops work
/// unchanged; only the first `dim` axes are physical.
struct GridSpec {
    int dim = 2;
    Index3 n{1, 1, 1};
    std::array<double, 3> length{1.0, 1.0, 1.0};
    std::array<double, 3> h{1.0, 1.0, 1.0};

    static GridSpec build(int dim, std::span<const int> cells, std::span<const double> extent) {
        if (dim != 2 && dim != 3) throw ValidationError("grid dimension must be 2 or 3");
        if (static_cast<int>(cells.size()) != dim || static_cast<int>(extent.size()) != dim)
            throw ValidationError("grid needs one cell count and one length per axis");
        GridSpec g;
        g.dim = dim;
        for (int a = 0; a < dim; ++a) {
            if (cells[static_cast<std::size_t>(a)] < 2)
                throw ValidationError("grid needs at least 2 cells along axis " + std::to_string(a));
            if (!(extent[static_cast<std::size_t>(a)] > 0.0) || !std::isfinite(extent[static_cast<std::size_t>(a)]))
                throw ValidationError("grid length must be positive along axis " + std::to_string(a));
            g.n[static_cast<std::size_t>(a)] = cells[static_cast<std::size_t>(a)];
            g.length[static_cast<std::size_t>(a)] = extent[static_cast<std::size_t>(a)];
            g.h[static_cast<std::size_t>(a)] = g.length[static_cast<std::size_t>(a)] / g.n[static_cast<std::size_t>(a)];
        }
        return g;
    }

    /// Unit-extent convenience overload.
    static GridSpec build(int dim, std::span<const int> cells) {
        std::vector<double> ones(cells.size(), 1.0);
        return build(dim, cells, ones);
    }

    double cell_center(int axis, int i) const { return (i + 0.5) * h[static_cast<std::size_t>(axis)]; }
    double face(int axis, int i) const { return i * h[static_cast<std::size_t>(axis)]; }

    std::size_t cell_count() const {
        return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]) * static_cast<std::size_t>(n[2]);
    }

    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= h[static_cast<std::size_t>(a)];
        return v;
    }

    double volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= length[static_cast<std::size_t>(a)];
        return v;
    }

    Index3 cell_shape() const { return n; }

    /// Storage shape of velocity component `comp`: one extra face along its own axis.
    Index3 component_shape(int comp) const {
        Index3 s = n;
        s[static_cast<std::size_t>(comp)] += 1;
        return s;
    }

    /// Physical location of entry `idx` of component `comp` (faces along comp, centers elsewhere).
    Point component_position(int comp, const Index3& idx) const {
        Point x{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a)
            x[static_cast<std::size_t>(a)] = (a == comp) ? face(a, idx[static_cast<std::size_t>(a)])
                                                         : cell_center(a, idx[static_cast<std::size_t>(a)]);
        return x;
    }

    Point cell_position(const Index3& idx) const {
        Point x{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) x[static_cast<std::size_t>(a)] = cell_center(a, idx[static_cast<std::size_t>(a)]);
        return x;
    }

    bool operator==(const GridSpec&) const = default;
};

/// Dense 3-index array, x fastest.
class Array3 {
public:
    Array3() = default;
    explicit Array3(const Index3& shape, double fill = 0.0)
        : shape_(shape),
          data_(static_cast<std::size_t>(shape[0]) * static_cast<std::size_t>(shape[1]) *
                    static_cast<std::size_t>(shape[2]),
                fill) {}

    const Index3& shape() const noexcept { return shape_; }
    int extent(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }
    std::size_t size() const noexcept { return data_.size(); }

    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(shape_[0]) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(shape_[1]) * static_cast<std::size_t>(k));
    }
    std::size_t index(const Index3& idx) const { return index(idx[0], idx[1], idx[2]); }

    double& operator()(int i, int j, int k = 0) { return data_[index(i, j, k)]; }
    double operator()(int i, int j, int k = 0) const { return data_[index(i, j, k)]; }
    double& operator[](const Index3& idx) { return data_[index(idx)]; }
    double operator[](const Index3& idx) const { return data_[index(idx)]; }

    bool contains(const Index3& idx) const {
        for (std::size_t a = 0; a < 3; ++a)
            if (idx[a] < 0 || idx[a] >= shape_[a]) return false;
        return true;
    }

    Index3 unravel(std::size_t flat) const {
        Index3 idx{};
        idx[0] = static_cast<int>(flat % static_cast<std::size_t>(shape_[0]));
        flat /= static_cast<std::size_t>(shape_[0]);
        idx[1] = static_cast<int>(flat % static_cast<std::size_t>(shape_[1]));
        idx[2] = static_cast<int>(flat / static_cast<std::size_t>(shape_[1]));
        return idx;
    }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    std::vector<double>& raw() noexcept { return data_; }
    const std::vector<double>& raw() const noexcept { return data_; }

    std::size_t stride(int axis) const {
        if (axis == 0) return 1;
        if (axis == 1) return static_cast<std::size_t>(shape_[0]);
        return static_cast<std::size_t>(shape_[0]) * static_cast<std::size_t>(shape_[1]);
    }

    /// Lines along `axis` are enumerated by the remaining two axes, lower axis fastest.
    std::size_t line_count(int axis) const { return size() / static_cast<std::size_t>(extent(axis)); }
    int line_length(int axis) const { return extent(axis); }

    std::size_t line_origin(int axis, std::size_t line) const {
        if (line >= line_count(axis)) throw ValidationError("line index out of range");
        const int b = axis == 0 ? 1 : 0;
        const int c = axis == 2 ? 1 : 2;
        const auto nb = static_cast<std::size_t>(extent(b));
        Index3 idx{0, 0, 0};
        idx[static_cast<std::size_t>(b)] = static_cast<int>(line % nb);
        idx[static_cast<std::size_t>(c)] = static_cast<int>(line / nb);
        return index(idx);
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Array3&) const = default;

private:
    Index3 shape_{0, 0, 0};
    std::vector<double> data_;
};

/// Copies one line along `axis` into `out` (length = extent(axis)).
inline void extract_line(const Array3& a, int axis, std::size_t line, std::span<double> out) {
    const std::size_t origin = a.line_origin(axis, line);
    const std::size_t stride = a.stride(axis);
    const auto len = static_cast<std::size_t>(a.extent(axis));
    if (out.size() != len) throw ValidationError("line buffer has wrong length");
    const auto src = a.values();
    for (std::size_t i = 0; i < len; ++i) out[i] = src[origin + i * stride];
}

inline std::vector<double> extract_line(const Array3& a, int axis, std::size_t line) {
    std::vector<double> out(static_cast<std::size_t>(a.extent(axis)));
    extract_line(a, axis, line, out);
    return out;
}

inline void scatter_line(Array3& a, int axis, std::size_t line, std::span<const double> in) {
    const std::size_t origin = a.line_origin(axis, line);
    const std::size_t stride = a.stride(axis);
    const auto len = static_cast<std::size_t>(a.extent(axis));
    if (in.size() != len) throw ValidationError("line buffer has wrong length");
    auto dst = a.values();
    for (std::size_t i = 0; i < len; ++i) dst[origin + i * stride] = in[i];
}

/// Cell-centered scalar (pressure, pressure correction).
struct ScalarField {
    GridSpec grid;
    Array3 values;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g, double fill = 0.0) : grid(g), values(g.cell_shape(), fill) {}

    double& operator()(int i, int j, int k = 0) { return values(i, j, k); }
    double operator()(int i, int j, int k = 0) const { return values(i, j, k); }

    template <class F>
    static ScalarField sample(const GridSpec& g, F&& f) {
        ScalarField s(g);
        for (std::size_t flat = 0; flat < s.values.size(); ++flat)
            s.values.raw()[flat] = f(g.cell_position(s.values.unravel(flat)));
        return s;
    }
};

/// Face-centered velocity: component d lives on faces normal to axis d.
struct StaggeredVectorField {
    GridSpec grid;
    std::array<Array3, 3> comp;

    StaggeredVectorField() = default;
    explicit StaggeredVectorField(const GridSpec& g, double fill = 0.0) : grid(g) {
        for (int c = 0; c < g.dim; ++c) comp[static_cast<std::size_t>(c)] = Array3(g.component_shape(c), fill);
    }

    int dim() const { return grid.dim; }
    Array3& operator[](int c) { return comp[static_cast<std::size_t>(c)]; }
    const Array3& operator[](int c) const { return comp[static_cast<std::size_t>(c)]; }

    /// f(component, position) sampled at every face of every component.
    template <class F>
    static StaggeredVectorField sample(const GridSpec& g, F&& f) {
        StaggeredVectorField v(g);
        for (int c = 0; c < g.dim; ++c) {
            auto& a = v[c];
            for (std::size_t flat = 0; flat < a.size(); ++flat)
                a.raw()[flat] = f(c, g.component_position(c, a.unravel(flat)));
        }
        return v;
    }
};

// --- elementwise helpers -----------------------------------------------------

inline void axpy(double alpha, const Array3& x, Array3& y) {
    auto xs = x.values();
    auto ys = y.values();
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] += alpha * xs[i];
}

inline void axpy(double alpha, const ScalarField& x, ScalarField& y) { axpy(alpha, x.values, y.values); }

inline void axpy(double alpha, const StaggeredVectorField& x, StaggeredVectorField& y) {
    for (int c = 0; c < y.dim(); ++c) axpy(alpha, x[c], y[c]);
}

inline void scale(double alpha, StaggeredVectorField& y) {
    for (int c = 0; c < y.dim(); ++c)
        for (auto& v : y[c].values()) v *= alpha;
}

inline void scale(double alpha, ScalarField& y) {
    for (auto& v : y.values.values()) v *= alpha;
}

inline bool all_finite(const Array3& a) {
    return std::all_of(a.raw().begin(), a.raw().end(), [](double v) { return std::isfinite(v); });
}

inline bool all_finite(const StaggeredVectorField& u) {
    for (int c = 0; c < u.dim(); ++c)
        if (!all_finite(u[c])) return false;
    return true;
}

inline bool all_finite(const ScalarField& p) { return all_finite(p.values); }

inline double max_abs(const Array3& a) {
    double m = 0.0;
    for (double v : a.raw()) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs(const StaggeredVectorField& u) {
    double m = 0.0;
    for (int c = 0; c < u.dim(); ++c) m = std::max(m, max_abs(u[c]));
    return m;
}

inline double max_abs(const ScalarField& p) { return max_abs(p.values); }

} // namespace dsplit
