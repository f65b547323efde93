#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dsplit/errors.hpp"
#include "dsplit/grid.hpp"
#include "dsplit/parallel.hpp"

namespace dsplit {

/// Row i: lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1].
struct TridiagonalSystem {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    TridiagonalSystem() = default;
    explicit TridiagonalSystem(std::size_t n) : lower(n > 0 ? n - 1 : 0), diag(n), upper(n > 0 ? n - 1 : 0) {}

    std::size_t size() const noexcept { return diag.size(); }

    std::vector<double> multiply(std::span<const double> x) const {
        const std::size_t n = size();
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) s += lower[i - 1] * x[i - 1];
            if (i + 1 < n) s += upper[i] * x[i + 1];
            y[i] = s;
        }
        return y;
    }
};

/// Thomas factorization kept for repeated solves with the same matrix.
/// Immutable after construction, so one instance can serve many threads.
class LineSolver {
public:
    LineSolver() = default;

    explicit LineSolver(const TridiagonalSystem& s)
        : lower_(s.lower), inv_pivot_(s.size()), upper_mod_(s.size() > 0 ? s.size() - 1 : 0) {
        const std::size_t n = s.size();
        if (n == 0) throw ValidationError("empty tridiagonal system");
        if (s.lower.size() != n - 1 || s.upper.size() != n - 1)
            throw ValidationError("tridiagonal band lengths do not match the diagonal");
        double pivot = s.diag[0];
        for (std::size_t i = 0;; ++i) {
            if (pivot == 0.0 || !std::isfinite(pivot))
                throw NumericalError("singular tridiagonal system (zero pivot at row " + std::to_string(i) + ")");
            inv_pivot_[i] = 1.0 / pivot;
            if (i + 1 == n) break;
            upper_mod_[i] = s.upper[i] * inv_pivot_[i];
            pivot = s.diag[i + 1] - s.lower[i] * upper_mod_[i];
        }
    }

    std::size_t size() const noexcept { return inv_pivot_.size(); }

    /// Overwrites x (holding the right-hand side) with the solution.
    void solve(std::span<double> x) const {
        const std::size_t n = size();
        x[0] *= inv_pivot_[0];
        for (std::size_t i = 1; i < n; ++i) x[i] = (x[i] - lower_[i - 1] * x[i - 1]) * inv_pivot_[i];
        for (std::size_t i = n - 1; i-- > 0;) x[i] -= upper_mod_[i] * x[i + 1];
    }

    /// Solves the lines x[i + r * row_stride], r = 0..size-1, for every i in [i0, i1).
    void solve_rows(std::span<double> x, std::size_t row_stride, std::size_t i0, std::size_t i1) const {
        const std::size_t n = size();
        double* base = x.data();
        for (std::size_t i = i0; i < i1; ++i) base[i] *= inv_pivot_[0];
        for (std::size_t r = 1; r < n; ++r) {
            double* row = base + r * row_stride;
            const double* prev = row - row_stride;
            const double l = lower_[r - 1], ip = inv_pivot_[r];
            for (std::size_t i = i0; i < i1; ++i) row[i] = (row[i] - l * prev[i]) * ip;
        }
        for (std::size_t r = n - 1; r-- > 0;) {
            double* row = base + r * row_stride;
            const double* next = row + row_stride;
            const double u = upper_mod_[r];
            for (std::size_t i = i0; i < i1; ++i) row[i] -= u * next[i];
        }
    }

private:
    std::vector<double> lower_;
    std::vector<double> inv_pivot_;
    std::vector<double> upper_mod_;
};

inline std::vector<double> thomas_solve(const TridiagonalSystem& system, std::span<const double> rhs) {
    if (rhs.size() != system.size()) throw ValidationError("rhs length does not match the system");
    std::vector<double> x(rhs.begin(), rhs.end());
    LineSolver(system).solve(x);
    return x;
}

enum class Staggering { CellCentered, FaceCentered };
enum class LineEnd { Dirichlet, NeumannZero };

/// Discrete (1 - theta d^2/dx^2) on one grid line of `n` cells.
///
/// Cell-centered lines have n unknowns: Dirichlet ends fold the reflected ghost
/// into the diagonal (the matching 2 theta/h^2 * g goes to the rhs), Neumann ends
/// mirror. Face-centered lines have n + 1 unknowns: Dirichlet ends become
/// identity rows (value pinned through the rhs), Neumann ends mirror across
/// the boundary face.
inline TridiagonalSystem assemble_helmholtz_line(int n, double h, double theta, LineEnd left, LineEnd right,
                                                 Staggering stagger) {
    if (!(theta > 0.0)) throw ValidationError("Helmholtz coefficient theta must be positive");
    if (n < 1 || !(h > 0.0)) throw ValidationError("bad line geometry");
    const double c = theta / (h * h);
    const std::size_t m = static_cast<std::size_t>(stagger == Staggering::CellCentered ? n : n + 1);
    TridiagonalSystem s(m);
    for (std::size_t i = 0; i < m; ++i) s.diag[i] = 1.0 + 2.0 * c;
    for (std::size_t i = 0; i + 1 < m; ++i) s.lower[i] = s.upper[i] = -c;

    if (stagger == Staggering::CellCentered) {
        s.diag.front() += left == LineEnd::Dirichlet ? c : -c;
        s.diag.back() += right == LineEnd::Dirichlet ? c : -c;
        return s;
    }
    if (m < 2) return s;
    if (left == LineEnd::Dirichlet) {
        s.diag.front() = 1.0;
        s.upper.front() = 0.0;
    } else {
        s.upper.front() = -2.0 * c;
    }
    if (right == LineEnd::Dirichlet) {
        s.diag.back() = 1.0;
        s.lower.back() = 0.0;
    } else {
        s.lower.back() = -2.0 * c;
    }
    return s;
}

/// Solves the same prefactored system on every line of `field` along `axis`,
/// in place (field holds the right-hand sides on entry). Lines are independent,
/// so the result does not depend on the executor's worker count.
inline void batch_solve(const LineSolver& solver, Array3& field, int axis, Executor& exec = Executor::serial()) {
    const auto len = static_cast<std::size_t>(field.extent(axis));
    if (solver.size() != len) throw ValidationError("line solver size does not match the field extent");
    const std::size_t lines = field.line_count(axis);
    const std::size_t stride = field.stride(axis);
    auto data = field.values();
    if (axis == 0) {
        exec.parallel_for(lines, [&](std::size_t begin, std::size_t end) {
            for (std::size_t line = begin; line < end; ++line) solver.solve(data.subspan(field.line_origin(0, line), len));
        });
        return;
    }
    // Lines along y or z: sweep whole x-rows at once so memory access stays contiguous.
    const auto nx = static_cast<std::size_t>(field.extent(0));
    const int other = axis == 1 ? 2 : 1;
    const auto panels = static_cast<std::size_t>(field.extent(other));
    const std::size_t panel_stride = field.stride(other);
    constexpr std::size_t block = 512;
    const std::size_t blocks_per_panel = (nx + block - 1) / block;
    exec.parallel_for(panels * blocks_per_panel, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            const std::size_t panel = t / blocks_per_panel;
            const std::size_t i0 = (t % blocks_per_panel) * block;
            const std::size_t i1 = std::min(nx, i0 + block);
            solver.solve_rows(data.subspan(panel * panel_stride), stride, i0, i1);
        }
    });
}

inline Array3 batch_solve(const LineSolver& solver, const Array3& rhs, int axis, Executor& exec = Executor::serial()) {
    Array3 out = rhs;
    batch_solve(solver, out, axis, exec);
    return out;
}

} // namespace dsplit
