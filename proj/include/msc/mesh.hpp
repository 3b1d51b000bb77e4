#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace msc {

using Vec3 = std::array<double, 3>;
using Lattice3 = std::array<int, 3>;

/// Outward normal direction of a cube face.
enum class BoundarySide : std::uint8_t { MinusX, PlusX, MinusY, PlusY, MinusZ, PlusZ };

/// Axis index (0, 1, 2) of the normal of a cube face.
constexpr int normal_axis(BoundarySide s) { return static_cast<int>(s) / 2; }

struct BoundaryFace {
    int tet;
    int local_face;  // face opposite local vertex `local_face`
    BoundarySide side;
};

/// Uniform tetrahedral mesh of the unit cube (0,1)^3.
///
/// Each of the N^3 lattice cubes is split into the six Kuhn tetrahedra that
/// share the diagonal from its lowest to its highest corner. The diagonal
/// direction is the same in every cube, so the mesh at 2N refines the mesh
/// at N. Vertices are numbered lexicographically with x fastest.
class Mesh {
public:
    explicit Mesh(int subdivisions);

    int subdivisions() const noexcept { return n_; }
    int vertex_count() const noexcept { return static_cast<int>(vertices_.size()); }
    int tet_count() const noexcept { return static_cast<int>(tets_.size()); }

    std::span<const Vec3> vertices() const noexcept { return vertices_; }
    std::span<const std::array<int, 4>> tets() const noexcept { return tets_; }
    std::span<const BoundaryFace> boundary_faces() const noexcept { return boundary_faces_; }

    /// Integer coordinates of a vertex on the (N+1)^3 lattice.
    Lattice3 vertex_lattice(int v) const noexcept;
    int vertex_index(int i, int j, int k) const noexcept { return i + (n_ + 1) * (j + (n_ + 1) * k); }

    double signed_volume(int tet) const noexcept;

private:
    int n_;
    std::vector<Vec3> vertices_;
    std::vector<std::array<int, 4>> tets_;
    std::vector<BoundaryFace> boundary_faces_;
};

/// Throws InvalidArgument for N < 1.
Mesh build_unit_cube_mesh(int subdivisions);

/// Longest edge over all tetrahedra.
double mesh_diameter(const Mesh& mesh);

/// Per-vertex data attached to a VTK export. `components` is 1 or 3.
struct NodalField {
    std::string name;
    int components = 1;
    std::vector<double> values;  // vertex-major, `components` entries per vertex
};

/// Legacy ASCII VTK, UNSTRUCTURED_GRID with linear tetrahedra (cell type 10).
void write_vtk(std::ostream& out, const Mesh& mesh, std::span<const NodalField> fields = {});

}  // namespace msc
