#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "dsplit/errors.hpp"
#include "dsplit/grid.hpp"

namespace dsplit {

/// Velocity at a cell center: mean of the two faces of each component.
inline Point cell_velocity(const StaggeredVectorField& u, const Index3& cell) {
    Point v{0.0, 0.0, 0.0};
    for (int c = 0; c < u.dim(); ++c) {
        Index3 hi = cell;
        hi[static_cast<std::size_t>(c)] += 1;
        v[static_cast<std::size_t>(c)] = 0.5 * (u[c][cell] + u[c][hi]);
    }
    return v;
}

/// One row per cell: x,y[,z],u,v[,w],p with velocities interpolated to centers.
inline void write_field_csv(std::ostream& os, const StaggeredVectorField& u, const ScalarField& p) {
    const GridSpec& g = p.grid;
    const bool three = g.dim == 3;
    os << (three ? "x,y,z,u,v,w,p\n" : "x,y,u,v,p\n") << std::setprecision(12);
    const Index3 shape = g.cell_shape();
    for (int k = 0; k < shape[2]; ++k)
        for (int j = 0; j < shape[1]; ++j)
            for (int i = 0; i < shape[0]; ++i) {
                const Index3 cell{i, j, k};
                const Point x = g.cell_position(cell);
                const Point v = cell_velocity(u, cell);
                os << x[0] << ',' << x[1] << ',';
                if (three) os << x[2] << ',';
                os << v[0] << ',' << v[1] << ',';
                if (three) os << v[2] << ',';
                os << p.values[cell] << '\n';
            }
}

/// Legacy ASCII structured-points volume with cell-centered velocity and pressure.
inline void write_vtk(std::ostream& os, const StaggeredVectorField& u, const ScalarField& p) {
    const GridSpec& g = p.grid;
    const Index3 shape = g.cell_shape();
    os << "# vtk DataFile Version 3.0\ndsplit field\nASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << shape[0] << ' ' << shape[1] << ' ' << shape[2] << '\n';
    os << std::setprecision(12);
    os << "ORIGIN " << 0.5 * g.h[0] << ' ' << 0.5 * g.h[1] << ' ' << (g.dim == 3 ? 0.5 * g.h[2] : 0.0) << '\n';
    os << "SPACING " << g.h[0] << ' ' << g.h[1] << ' ' << g.h[2] << '\n';
    os << "POINT_DATA " << g.cell_count() << "\nVECTORS velocity double\n";
    for (int k = 0; k < shape[2]; ++k)
        for (int j = 0; j < shape[1]; ++j)
            for (int i = 0; i < shape[0]; ++i) {
                const Point v = cell_velocity(u, {i, j, k});
                os << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
            }
    os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (double v : p.values.raw()) os << v << '\n';
}

/// Writes through `body` into `path`, creating parent directories.
inline void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace dsplit
