#pragma once

#include <array>
#include <cmath>

#include "dsplit/boundary.hpp"
#include "dsplit/grid.hpp"
#include "dsplit/parallel.hpp"
#include "dsplit/tridiag.hpp"

namespace dsplit {

// --- inner products and means --------------------------------------------------
// Sums run sequentially in storage order so results are reproducible bit for bit.

inline double dot(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    const auto& x = a.values.raw();
    const auto& y = b.values.raw();
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s * a.grid.cell_volume();
}

/// Every face, boundary faces included, carries the cell volume as weight.
inline double dot(const StaggeredVectorField& a, const StaggeredVectorField& b) {
    double s = 0.0;
    for (int c = 0; c < a.dim(); ++c) {
        const auto& x = a[c].raw();
        const auto& y = b[c].raw();
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    }
    return s * a.grid.cell_volume();
}

inline double l2_norm(const ScalarField& a) { return std::sqrt(dot(a, a)); }
inline double l2_norm(const StaggeredVectorField& a) { return std::sqrt(dot(a, a)); }

inline double mean(const ScalarField& q) {
    double s = 0.0;
    for (double v : q.values.raw()) s += v;
    return s / static_cast<double>(q.values.size());
}

inline ScalarField mean_zero_project(ScalarField q) {
    const double m = mean(q);
    for (double& v : q.values.raw()) v -= m;
    return q;
}

// --- divergence / gradient -----------------------------------------------------

inline ScalarField divergence(const StaggeredVectorField& u) {
    const GridSpec& g = u.grid;
    ScalarField d(g);
    for (int c = 0; c < g.dim; ++c) {
        const Array3& uc = u[c];
        const double inv_h = 1.0 / g.h[static_cast<std::size_t>(c)];
        const std::size_t stride = uc.stride(c);
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i) {
                    const std::size_t lo = uc.index(i, j, k);
                    d(i, j, k) += (uc.raw()[lo + stride] - uc.raw()[lo]) * inv_h;
                }
    }
    return d;
}

/// Face gradient of a cell field. Boundary faces hold 0 (their normal velocity is
/// pinned) except on pressure-Dirichlet walls, where p = 0 sits on the face.
inline StaggeredVectorField gradient_to_faces(const ScalarField& p, const BoundarySpec* spec = nullptr) {
    const GridSpec& g = p.grid;
    StaggeredVectorField grad(g);
    for (int c = 0; c < g.dim; ++c) {
        Array3& gc = grad[c];
        const double h = g.h[static_cast<std::size_t>(c)];
        const int n = g.n[static_cast<std::size_t>(c)];
        const std::size_t stride = p.values.stride(c);
        const Index3 shape = gc.shape();
        const auto& pv = p.values.raw();
        std::size_t flat = 0;
        for (int k = 0; k < shape[2]; ++k)
            for (int j = 0; j < shape[1]; ++j)
                for (int i = 0; i < shape[0]; ++i, ++flat) {
                    const Index3 idx{i, j, k};
                    const int f = idx[static_cast<std::size_t>(c)];
                    if (f > 0 && f < n) {
                        const std::size_t hi = p.values.index(idx);
                        gc.raw()[flat] = (pv[hi] - pv[hi - stride]) / h;
                    } else if (spec && spec->at(c, f == 0 ? 0 : 1).pressure_dirichlet) {
                        Index3 cell = idx;
                        cell[static_cast<std::size_t>(c)] = f == 0 ? 0 : n - 1;
                        const double pc = p.values[cell];
                        gc.raw()[flat] = f == 0 ? pc / (0.5 * h) : -pc / (0.5 * h);
                    }
                }
    }
    return grad;
}

/// Squared L2 norm of the cell gradient over interior faces only.
inline double gradient_norm_squared(const ScalarField& q) {
    const GridSpec& g = q.grid;
    double s = 0.0;
    for (int a = 0; a < g.dim; ++a) {
        const double h = g.h[static_cast<std::size_t>(a)];
        for (std::size_t flat = 0; flat < q.values.size(); ++flat) {
            Index3 idx = q.values.unravel(flat);
            if (idx[static_cast<std::size_t>(a)] == 0) continue;
            Index3 lo = idx;
            lo[static_cast<std::size_t>(a)] -= 1;
            const double d = (q.values[idx] - q.values[lo]) / h;
            s += d * d;
        }
    }
    return s * g.cell_volume();
}

// --- second differences -------------------------------------------------------

/// 3-point second difference of velocity component `comp` along `axis`, ghosts from
/// the boundary rules (bc == nullptr means homogeneous wall data).
inline Array3 second_difference(const Array3& values, int comp, int axis, const GridSpec& grid,
                                const BoundarySpec& spec, const BoundaryValues* bc) {
    Array3 out(values.shape());
    const double inv_h2 = 1.0 / (grid.h[static_cast<std::size_t>(axis)] * grid.h[static_cast<std::size_t>(axis)]);
    const GhostedComponent ghosted(values, comp, spec, bc);
    const std::size_t stride = values.stride(axis);
    const int n = values.extent(axis);
    const auto& v = values.raw();
    const Index3 shape = values.shape();
    std::size_t flat = 0;
    for (int k = 0; k < shape[2]; ++k)
        for (int j = 0; j < shape[1]; ++j)
            for (int i0 = 0; i0 < shape[0]; ++i0, ++flat) {
                const Index3 idx{i0, j, k};
                const int i = idx[static_cast<std::size_t>(axis)];
                double lo, hi;
                if (i > 0 && i < n - 1) {
                    lo = v[flat - stride];
                    hi = v[flat + stride];
                } else {
                    Index3 a = idx, b = idx;
                    a[static_cast<std::size_t>(axis)] -= 1;
                    b[static_cast<std::size_t>(axis)] += 1;
                    lo = ghosted(a);
                    hi = ghosted(b);
                }
                out.raw()[flat] = (lo - 2.0 * v[flat] + hi) * inv_h2;
            }
    return out;
}

/// Adds alpha * sum over `axes` of the second differences of u into `out`.
inline void add_laplacian_part(double alpha, const StaggeredVectorField& u, std::span<const int> axes,
                               const BoundarySpec& spec, const BoundaryValues* bc, StaggeredVectorField& out) {
    for (int c = 0; c < u.dim(); ++c)
        for (int a : axes) axpy(alpha, second_difference(u[c], c, a, u.grid, spec, bc), out[c]);
}

/// Cell-field second difference along `axis`: Neumann mirror ghosts, or
/// homogeneous Dirichlet (odd reflection) on pressure-Dirichlet walls.
inline ScalarField scalar_second_difference(const ScalarField& q, int axis, const BoundarySpec* spec = nullptr) {
    const GridSpec& g = q.grid;
    ScalarField out(g);
    const double inv_h2 = 1.0 / (g.h[static_cast<std::size_t>(axis)] * g.h[static_cast<std::size_t>(axis)]);
    const int n = g.n[static_cast<std::size_t>(axis)];
    const std::size_t stride = q.values.stride(axis);
    const bool dir_lo = spec && spec->at(axis, 0).pressure_dirichlet;
    const bool dir_hi = spec && spec->at(axis, 1).pressure_dirichlet;
    const auto& v = q.values.raw();
    for (std::size_t flat = 0; flat < v.size(); ++flat) {
        const int i = static_cast<int>((flat / stride) % static_cast<std::size_t>(n));
        const double c = v[flat];
        const double lo = i > 0 ? v[flat - stride] : (dir_lo ? -c : c);
        const double hi = i < n - 1 ? v[flat + stride] : (dir_hi ? -c : c);
        out.values.raw()[flat] = (lo - 2.0 * c + hi) * inv_h2;
    }
    return out;
}

// --- factorized pressure operator ---------------------------------------------

/// A = (1 - d_xx)(1 - d_yy)(1 - d_zz) on cell fields with Neumann (or, on
/// pressure-Dirichlet walls, homogeneous Dirichlet) line conditions.
///
/// With Neumann conditions everywhere A maps constants to constants, so solve()
/// works on the zero-mean part of the data and returns a zero-mean result.
class PenaltyOperator {
public:
    explicit PenaltyOperator(const GridSpec& grid, const BoundarySpec& spec = BoundarySpec{},
                             Executor& exec = Executor::serial())
        : grid_(grid), spec_(spec), exec_(&exec), neumann_only_(!spec.has_pressure_dirichlet()) {
        for (int a = 0; a < grid.dim; ++a) {
            const auto end = [&](int side) {
                return spec.at(a, side).pressure_dirichlet ? LineEnd::Dirichlet : LineEnd::NeumannZero;
            };
            solvers_[static_cast<std::size_t>(a)] =
                LineSolver(assemble_helmholtz_line(grid.n[static_cast<std::size_t>(a)], grid.h[static_cast<std::size_t>(a)],
                                                   1.0, end(0), end(1), Staggering::CellCentered));
        }
    }

    const GridSpec& grid() const { return grid_; }
    bool neumann_only() const { return neumann_only_; }

    ScalarField apply(const ScalarField& q) const {
        ScalarField r = q;
        for (int a = 0; a < grid_.dim; ++a) {
            ScalarField d = scalar_second_difference(r, a, &spec_);
            axpy(-1.0, d, r);
        }
        return r;
    }

    /// One batched line solve per axis in x, y, z order.
    ScalarField solve(const ScalarField& g) const {
        ScalarField x = neumann_only_ ? mean_zero_project(g) : g;
        for (int a = 0; a < grid_.dim; ++a) batch_solve(solvers_[static_cast<std::size_t>(a)], x.values, a, *exec_);
        return neumann_only_ ? mean_zero_project(std::move(x)) : x;
    }

private:
    GridSpec grid_;
    BoundarySpec spec_;
    Executor* exec_;
    bool neumann_only_;
    std::array<LineSolver, 3> solvers_{};
};

inline ScalarField apply_A(const ScalarField& q) { return PenaltyOperator(q.grid).apply(q); }
inline ScalarField solve_A(const ScalarField& g) { return PenaltyOperator(g.grid).solve(g); }

// --- B-operator diagnostic ----------------------------------------------------

namespace detail {

/// Edge set of a component along one axis for the mixed-difference sums: faces
/// along the component's own axis (n edges between n+1 faces), cells with
/// reflected ghosts elsewhere (n+1 edges, the two wall edges at half weight).
struct EdgeRange {
    int first;
    int last;  // inclusive
    bool half_at_ends;
};

inline EdgeRange edge_range(const GridSpec& g, int comp, int axis) {
    const int n = g.n[static_cast<std::size_t>(axis)];
    if (axis == comp) return {0, n - 1, false};
    return {-1, n - 1, true};
}

inline double edge_weight(const EdgeRange& r, int e) {
    return (r.half_at_ends && (e == r.first || e == r.last)) ? 0.5 : 1.0;
}

} // namespace detail

/// Discrete <v, B v> for v with homogeneous Dirichlet traces, realized as the sum of
/// squared compact mixed differences: |d_xy v|^2 in 2D, and in 3D
/// |d_xy v|^2 + |d_yz v|^2 + |d_zx v|^2 + (tau/2) |d_xyz v|^2.
inline double b_inner(const StaggeredVectorField& v, double tau) {
    const GridSpec& g = v.grid;
    const BoundarySpec homogeneous;
    double total = 0.0;
    for (int c = 0; c < g.dim; ++c) {
        const GhostedComponent vc(v[c], c, homogeneous, nullptr);
        // Pairwise mixed terms.
        for (int a = 0; a < g.dim; ++a)
            for (int b = a + 1; b < g.dim; ++b) {
                const int o = 3 - a - b;  // remaining axis (2 in 2D, where it has one entry)
                const auto ra = detail::edge_range(g, c, a);
                const auto rb = detail::edge_range(g, c, b);
                const int no = v[c].extent(o);
                const double inv = 1.0 / (g.h[static_cast<std::size_t>(a)] * g.h[static_cast<std::size_t>(b)]);
                double s = 0.0;
                for (int io = 0; io < no; ++io)
                    for (int eb = rb.first; eb <= rb.last; ++eb)
                        for (int ea = ra.first; ea <= ra.last; ++ea) {
                            Index3 p{};
                            p[static_cast<std::size_t>(o)] = io;
                            auto at = [&](int da, int db) {
                                Index3 q = p;
                                q[static_cast<std::size_t>(a)] = ea + da;
                                q[static_cast<std::size_t>(b)] = eb + db;
                                return vc(q);
                            };
                            const double m = (at(1, 1) - at(1, 0) - at(0, 1) + at(0, 0)) * inv;
                            s += detail::edge_weight(ra, ea) * detail::edge_weight(rb, eb) * m * m;
                        }
                total += s;
            }
        if (g.dim == 3 && tau != 0.0) {
            const auto rx = detail::edge_range(g, c, 0);
            const auto ry = detail::edge_range(g, c, 1);
            const auto rz = detail::edge_range(g, c, 2);
            const double inv = 1.0 / (g.h[0] * g.h[1] * g.h[2]);
            double s = 0.0;
            for (int ez = rz.first; ez <= rz.last; ++ez)
                for (int ey = ry.first; ey <= ry.last; ++ey)
                    for (int ex = rx.first; ex <= rx.last; ++ex) {
                        double m = 0.0;
                        for (int dz = 0; dz < 2; ++dz)
                            for (int dy = 0; dy < 2; ++dy)
                                for (int dx = 0; dx < 2; ++dx) {
                                    const double sign = ((dx + dy + dz) % 2 == 1) ? -1.0 : 1.0;
                                    m += sign * vc(Index3{ex + dx, ey + dy, ez + dz});
                                }
                        // The stencil above is -d_xyz; only its square enters.
                        m *= inv;
                        s += detail::edge_weight(rx, ex) * detail::edge_weight(ry, ey) * detail::edge_weight(rz, ez) *
                             m * m;
                    }
            total += 0.5 * tau * s;
        }
    }
    return total * g.cell_volume();
}

} // namespace dsplit
