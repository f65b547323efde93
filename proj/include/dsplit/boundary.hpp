#pragma once

#include <array>
#include <functional>

#include "dsplit/grid.hpp"

namespace dsplit {

enum class BoundaryKind { Dirichlet, NeumannZero };

/// Velocity value on a wall: g(component, position, time).
using BoundaryFunction = std::function<double(int, const Point&, double)>;

struct WallCondition {
    std::array<BoundaryKind, 3> velocity{BoundaryKind::Dirichlet, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet};
    BoundaryFunction value;           ///< empty means homogeneous
    bool pressure_dirichlet = false;  ///< p = phi = 0 on this wall (outflow)
};

/// Boundary conditions per axis and side (0 = low, 1 = high).
struct BoundarySpec {
    std::array<std::array<WallCondition, 2>, 3> wall{};
    /// False when every wall value is independent of time; lets steppers sample once.
    bool time_dependent = false;

    const WallCondition& at(int axis, int side) const {
        return wall[static_cast<std::size_t>(axis)][static_cast<std::size_t>(side)];
    }
    WallCondition& at(int axis, int side) { return wall[static_cast<std::size_t>(axis)][static_cast<std::size_t>(side)]; }

    BoundaryKind kind(int axis, int side, int comp) const { return at(axis, side).velocity[static_cast<std::size_t>(comp)]; }

    bool has_pressure_dirichlet() const {
        for (const auto& axis : wall)
            for (const auto& w : axis)
                if (w.pressure_dirichlet) return true;
        return false;
    }

    static BoundarySpec no_slip() { return {}; }

    /// Dirichlet on every wall with the same value function.
    static BoundarySpec dirichlet(BoundaryFunction g, bool time_dependent) {
        BoundarySpec s;
        for (auto& axis : s.wall)
            for (auto& w : axis) w.value = g;
        s.time_dependent = time_dependent;
        return s;
    }
};

/// Ghost rule for a single boundary entry.
///
/// Tangential Dirichlet reflects linearly so the midpoint equals the wall value;
/// normal Dirichlet stores the wall value on the face itself; Neumann-zero mirrors.
inline double ghost_value(BoundaryKind kind, bool tangential, double interior, double bc) {
    if (kind == BoundaryKind::NeumannZero) return interior;
    return tangential ? 2.0 * bc - interior : bc;
}

/// Wall data sampled at one time level.
///
/// For component c and wall (axis a, side s) the plane has the component's
/// storage shape with axis a collapsed to one entry.
class BoundaryValues {
public:
    BoundaryValues() = default;

    BoundaryValues(const GridSpec& grid, const BoundarySpec& spec, double t) : grid_(grid) {
        for (int c = 0; c < grid.dim; ++c)
            for (int a = 0; a < grid.dim; ++a)
                for (int s = 0; s < 2; ++s) {
                    Index3 shape = grid.component_shape(c);
                    shape[static_cast<std::size_t>(a)] = 1;
                    Array3 plane(shape, 0.0);
                    const auto& wall = spec.at(a, s);
                    if (wall.value && spec.kind(a, s, c) == BoundaryKind::Dirichlet) {
                        for (std::size_t flat = 0; flat < plane.size(); ++flat) {
                            Index3 idx = plane.unravel(flat);
                            Point x = grid.component_position(c, idx);
                            x[static_cast<std::size_t>(a)] = s == 0 ? 0.0 : grid.length[static_cast<std::size_t>(a)];
                            plane.raw()[flat] = wall.value(c, x, t);
                        }
                    }
                    planes_[slot(c, a, s)] = std::move(plane);
                }
    }

    /// Homogeneous data on every wall.
    static BoundaryValues zero(const GridSpec& grid) { return BoundaryValues(grid, BoundarySpec{}, 0.0); }

    const GridSpec& grid() const { return grid_; }

    const Array3& plane(int comp, int axis, int side) const { return planes_[slot(comp, axis, side)]; }
    Array3& plane(int comp, int axis, int side) { return planes_[slot(comp, axis, side)]; }

    /// Wall value seen from component entry `idx`; the index along `axis` is ignored
    /// and the others are clamped into the plane.
    double at(int comp, int axis, int side, Index3 idx) const {
        const Array3& p = plane(comp, axis, side);
        idx[static_cast<std::size_t>(axis)] = 0;
        for (std::size_t d = 0; d < 3; ++d) idx[d] = std::clamp(idx[d], 0, p.shape()[d] - 1);
        return p[idx];
    }

    /// alpha * a + beta * b, plane by plane.
    static BoundaryValues combine(double alpha, const BoundaryValues& a, double beta, const BoundaryValues& b) {
        BoundaryValues out = a;
        for (std::size_t i = 0; i < out.planes_.size(); ++i) {
            auto dst = out.planes_[i].values();
            auto src = b.planes_[i].values();
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = alpha * dst[k] + beta * src[k];
        }
        return out;
    }

private:
    static std::size_t slot(int comp, int axis, int side) {
        return static_cast<std::size_t>((comp * 3 + axis) * 2 + side);
    }

    GridSpec grid_;
    std::array<Array3, 18> planes_{};
};

/// Read access to one velocity component that tolerates indices one step
/// outside the stored range on any axis, filling ghosts from the boundary rules.
class GhostedComponent {
public:
    GhostedComponent(const Array3& values, int comp, const BoundarySpec& spec, const BoundaryValues* bc)
        : v_(values), comp_(comp), spec_(spec), bc_(bc) {}

    double operator()(Index3 idx) const {
        if (v_.contains(idx)) return v_[idx];
        for (int a = 0; a < 3; ++a) {
            const int i = idx[static_cast<std::size_t>(a)];
            const int n = v_.extent(a);
            if (i >= 0 && i < n) continue;
            const int side = i < 0 ? 0 : 1;
            const BoundaryKind kind = spec_.kind(a, side, comp_);
            Index3 inner = idx;
            if (a != comp_) {
                inner[static_cast<std::size_t>(a)] = side == 0 ? 0 : n - 1;
                const double interior = (*this)(inner);
                const double g = (bc_ && kind == BoundaryKind::Dirichlet) ? bc_->at(comp_, a, side, idx) : 0.0;
                return ghost_value(kind, true, interior, g);
            }
            // Normal direction: index -1 or n (one past the boundary face).
            if (kind == BoundaryKind::NeumannZero) {
                inner[static_cast<std::size_t>(a)] = side == 0 ? 1 : n - 2;
                return (*this)(inner);
            }
            Index3 wall = idx;
            wall[static_cast<std::size_t>(a)] = side == 0 ? 0 : n - 1;
            inner[static_cast<std::size_t>(a)] = side == 0 ? 1 : n - 2;
            return 2.0 * (*this)(wall) - (*this)(inner);
        }
        return v_[idx];
    }

    double operator()(int i, int j, int k) const { return (*this)(Index3{i, j, k}); }

private:
    const Array3& v_;
    int comp_;
    const BoundarySpec& spec_;
    const BoundaryValues* bc_;
};

/// Overwrites every Dirichlet boundary face of every component with wall data.
inline void pin_normal_faces(StaggeredVectorField& u, const BoundarySpec& spec, const BoundaryValues& bc) {
    const GridSpec& g = u.grid;
    for (int c = 0; c < g.dim; ++c) {
        Array3& a = u[c];
        for (int s = 0; s < 2; ++s) {
            if (spec.kind(c, s, c) != BoundaryKind::Dirichlet) continue;
            const Array3& plane = bc.plane(c, c, s);
            const int face = s == 0 ? 0 : a.extent(c) - 1;
            for (std::size_t flat = 0; flat < plane.size(); ++flat) {
                Index3 idx = plane.unravel(flat);
                idx[static_cast<std::size_t>(c)] = face;
                a[idx] = plane.raw()[flat];
            }
        }
    }
}

} // namespace dsplit
