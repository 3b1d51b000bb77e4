#include "msc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "msc/errors.hpp"

namespace msc {

namespace {

constexpr std::array<std::array<int, 3>, 6> kAxisOrders = {{
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
}};

int permutation_sign(const std::array<int, 3>& p) {
    int inversions = 0;
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
            if (p[a] > p[b]) ++inversions;
    return inversions % 2 == 0 ? 1 : -1;
}

}  // namespace

Mesh::Mesh(int subdivisions) : n_(subdivisions) {
    if (subdivisions < 1) throw InvalidArgument("mesh subdivisions must be >= 1");
    const int np = n_ + 1;
    const double h = 1.0 / n_;
    vertices_.reserve(static_cast<std::size_t>(np) * np * np);
    for (int k = 0; k < np; ++k)
        for (int j = 0; j < np; ++j)
            for (int i = 0; i < np; ++i) vertices_.push_back({i * h, j * h, k * h});

    tets_.reserve(static_cast<std::size_t>(6) * n_ * n_ * n_);
    for (int k = 0; k < n_; ++k)
        for (int j = 0; j < n_; ++j)
            for (int i = 0; i < n_; ++i)
                for (const auto& order : kAxisOrders) {
                    Lattice3 p{i, j, k};
                    std::array<int, 4> tet{};
                    tet[0] = vertex_index(p[0], p[1], p[2]);
                    for (int s = 0; s < 3; ++s) {
                        ++p[order[s]];
                        tet[s + 1] = vertex_index(p[0], p[1], p[2]);
                    }
                    // Odd axis orders give negatively oriented paths.
                    if (permutation_sign(order) < 0) std::swap(tet[2], tet[3]);
                    tets_.push_back(tet);
                }

    for (int t = 0; t < tet_count(); ++t) {
        for (int f = 0; f < 4; ++f) {
            std::array<Lattice3, 3> corners{};
            int c = 0;
            for (int v = 0; v < 4; ++v)
                if (v != f) corners[c++] = vertex_lattice(tets_[t][v]);
            for (int axis = 0; axis < 3; ++axis) {
                for (int plane : {0, n_}) {
                    if (corners[0][axis] == plane && corners[1][axis] == plane && corners[2][axis] == plane) {
                        const auto side = static_cast<BoundarySide>(2 * axis + (plane == 0 ? 0 : 1));
                        boundary_faces_.push_back({t, f, side});
                    }
                }
            }
        }
    }
}

Lattice3 Mesh::vertex_lattice(int v) const noexcept {
    const int np = n_ + 1;
    return {v % np, (v / np) % np, v / (np * np)};
}

double Mesh::signed_volume(int tet) const noexcept {
    const auto& t = tets_[tet];
    const Vec3& a = vertices_[t[0]];
    Vec3 e[3];
    for (int s = 0; s < 3; ++s)
        for (int d = 0; d < 3; ++d) e[s][d] = vertices_[t[s + 1]][d] - a[d];
    const double det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1]) -
                       e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0]) +
                       e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
    return det / 6.0;
}

Mesh build_unit_cube_mesh(int subdivisions) { return Mesh(subdivisions); }

double mesh_diameter(const Mesh& mesh) {
    double longest = 0.0;
    const auto verts = mesh.vertices();
    for (const auto& t : mesh.tets())
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) {
                double s = 0.0;
                for (int d = 0; d < 3; ++d) {
                    const double diff = verts[t[a]][d] - verts[t[b]][d];
                    s += diff * diff;
                }
                longest = std::max(longest, std::sqrt(s));
            }
    return longest;
}

void write_vtk(std::ostream& out, const Mesh& mesh, std::span<const NodalField> fields) {
    for (const auto& field : fields) {
        if (field.components != 1 && field.components != 3)
            throw InvalidArgument("VTK field '" + field.name + "' must have 1 or 3 components");
        if (field.values.size() != static_cast<std::size_t>(field.components) * mesh.vertex_count())
            throw ShapeError("VTK field '" + field.name + "' does not match the vertex count");
    }
    const auto prec = out.precision(17);
    out << "# vtk DataFile Version 3.0\n"
        << "msc mesh N=" << mesh.subdivisions() << "\n"
        << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.vertex_count() << " double\n";
    for (const auto& v : mesh.vertices()) out << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    out << "CELLS " << mesh.tet_count() << ' ' << 5 * mesh.tet_count() << '\n';
    for (const auto& t : mesh.tets()) out << "4 " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
    out << "CELL_TYPES " << mesh.tet_count() << '\n';
    for (int t = 0; t < mesh.tet_count(); ++t) out << "10\n";
    if (!fields.empty()) {
        out << "POINT_DATA " << mesh.vertex_count() << '\n';
        for (const auto& field : fields) {
            if (field.components == 1)
                out << "SCALARS " << field.name << " double 1\nLOOKUP_TABLE default\n";
            else
                out << "VECTORS " << field.name << " double\n";
            for (int v = 0; v < mesh.vertex_count(); ++v) {
                for (int c = 0; c < field.components; ++c)
                    out << (c ? " " : "") << field.values[static_cast<std::size_t>(v) * field.components + c];
                out << '\n';
            }
        }
    }
    out.precision(prec);
}

}  // namespace msc
