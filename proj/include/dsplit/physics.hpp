#pragma once

#include <functional>

#include "dsplit/boundary.hpp"
#include "dsplit/grid.hpp"
#include "dsplit/parallel.hpp"

namespace dsplit {

/// Closed-form body force f(component, position, time); empty means zero.
struct ForcingSpec {
    std::function<double(int, const Point&, double)> f;

    bool is_zero() const { return !f; }

    static ForcingSpec zero() { return {}; }

    static ForcingSpec constant(Point value) {
        return {[value](int c, const Point&, double) { return value[static_cast<std::size_t>(c)]; }};
    }
};

inline StaggeredVectorField sample_forcing(const ForcingSpec& spec, double t, const GridSpec& grid) {
    if (spec.is_zero()) return StaggeredVectorField(grid);
    return StaggeredVectorField::sample(grid, [&](int c, const Point& x) { return spec.f(c, x, t); });
}

/// Convective term (u . grad) u at every face of every component.
///
/// The transported component is differenced centrally along each axis; the
/// transporting velocity is the face's own component or the 4-point average of
/// the neighbouring faces of the other component. Ghosts come from `bc`.
inline StaggeredVectorField advection_term(const StaggeredVectorField& u, const BoundarySpec& spec,
                                           const BoundaryValues* bc, Executor& exec = Executor::serial()) {
    const GridSpec& g = u.grid;
    const int dim = g.dim;
    StaggeredVectorField out(g);
    std::array<GhostedComponent, 3> ghosted{
        GhostedComponent(u.comp[0], 0, spec, bc), GhostedComponent(u.comp[dim > 1 ? 1 : 0], 1, spec, bc),
        GhostedComponent(u.comp[dim > 2 ? 2 : 0], 2, spec, bc)};

    for (int c = 0; c < dim; ++c) {
        const Array3& uc = u[c];
        Array3& oc = out[c];
        const Index3 shape = uc.shape();
        std::array<double, 3> inv_2h{};
        for (int a = 0; a < dim; ++a) inv_2h[static_cast<std::size_t>(a)] = 0.5 / g.h[static_cast<std::size_t>(a)];
        const std::size_t planes = static_cast<std::size_t>(shape[2]) * static_cast<std::size_t>(shape[1]);
        exec.parallel_for(planes, [&](std::size_t begin, std::size_t end) {
            for (std::size_t jk = begin; jk < end; ++jk) {
                const int j = static_cast<int>(jk % static_cast<std::size_t>(shape[1]));
                const int k = static_cast<int>(jk / static_cast<std::size_t>(shape[1]));
                const bool row_inner = (dim < 2 || (j >= 1 && j <= shape[1] - 2)) &&
                                       (dim < 3 || (k >= 1 && k <= shape[2] - 2));
                for (int i = 0; i < shape[0]; ++i) {
                    const Index3 idx{i, j, k};
                    double acc = 0.0;
                    if (row_inner && i >= 1 && i <= shape[0] - 2) {
                        // All stencil points are stored values.
                        const std::size_t at = uc.index(idx);
                        for (int a = 0; a < dim; ++a) {
                            const std::size_t st = uc.stride(a);
                            const double du = (uc.raw()[at + st] - uc.raw()[at - st]) * inv_2h[static_cast<std::size_t>(a)];
                            double transport;
                            if (a == c) {
                                transport = uc.raw()[at];
                            } else {
                                const Array3& ua = u[a];
                                const std::size_t base = ua.index(idx);
                                const std::size_t sa = ua.stride(a), sc = ua.stride(c);
                                transport = 0.25 * (ua.raw()[base] + ua.raw()[base + sa] + ua.raw()[base - sc] +
                                                    ua.raw()[base + sa - sc]);
                            }
                            acc += transport * du;
                        }
                        oc[idx] = acc;
                        continue;
                    }
                    for (int a = 0; a < dim; ++a) {
                        Index3 lo = idx, hi = idx;
                        lo[static_cast<std::size_t>(a)] -= 1;
                        hi[static_cast<std::size_t>(a)] += 1;
                        const double du = (ghosted[static_cast<std::size_t>(c)](hi) -
                                           ghosted[static_cast<std::size_t>(c)](lo)) *
                                          inv_2h[static_cast<std::size_t>(a)];
                        double transport;
                        if (a == c) {
                            transport = uc[idx];
                        } else {
                            // u_a at this c-face: faces idx_a, idx_a+1 along a; cells idx_c-1, idx_c along c.
                            transport = 0.0;
                            for (int da = 0; da < 2; ++da)
                                for (int dc = -1; dc < 1; ++dc) {
                                    Index3 q = idx;
                                    q[static_cast<std::size_t>(a)] += da;
                                    q[static_cast<std::size_t>(c)] += dc;
                                    transport += ghosted[static_cast<std::size_t>(a)](q);
                                }
                            transport *= 0.25;
                        }
                        acc += transport * du;
                    }
                    oc[idx] = acc;
                }
            }
        });
    }
    return out;
}

/// Second-order Adams-Bashforth extrapolation to the half step: 1.5 N_k - 0.5 N_{k-1}.
inline StaggeredVectorField ab2_extrapolate(const StaggeredVectorField& n_k, const StaggeredVectorField& n_km1) {
    StaggeredVectorField out = n_k;
    scale(1.5, out);
    axpy(-0.5, n_km1, out);
    return out;
}

} // namespace dsplit
