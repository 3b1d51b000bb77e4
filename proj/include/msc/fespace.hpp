#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <type_traits>
#include <vector>

#include "msc/element.hpp"
#include "msc/errors.hpp"
#include "msc/mesh.hpp"
#include "msc/sparse.hpp"

namespace msc {

using cplx = std::complex<double>;

enum class FieldKind { ScalarReal, ScalarComplex, Vector3 };

/// How the space constrains boundary nodes.
///  - None: no constraint.
///  - Dirichlet: every component of every boundary node is fixed to zero.
///  - Tangential: on a face x_i = 0 or 1 the two components orthogonal to
///    axis i are fixed to zero; nodes on cube edges and corners therefore
///    have all three components fixed.
enum class BoundaryCondition { None, Dirichlet, Tangential };

/// Continuous Lagrange space of order 1 or 2 on a unit-cube mesh.
///
/// Nodes of an order-r space sit on the uniform lattice of spacing 1/(rN)
/// and are numbered lexicographically (x fastest). Vector spaces interleave
/// components: dof = 3 * node + component. All constraints are homogeneous.
class FeSpace {
public:
    FeSpace(std::shared_ptr<const Mesh> mesh, FieldKind kind, int order, BoundaryCondition bc);

    const Mesh& mesh() const noexcept { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
    FieldKind kind() const noexcept { return kind_; }
    int order() const noexcept { return order_; }
    int components() const noexcept { return kind_ == FieldKind::Vector3 ? 3 : 1; }
    BoundaryCondition boundary_condition() const noexcept { return bc_; }
    const LagrangeTet& element() const noexcept { return element_; }

    /// Nodes per axis, r*N + 1.
    int lattice_size() const noexcept { return lattice_; }
    int node_count() const noexcept { return lattice_ * lattice_ * lattice_; }
    int dof_count() const noexcept { return node_count() * components(); }
    int dof(int node, int component) const noexcept { return node * components() + component; }

    Lattice3 node_lattice(int node) const noexcept;
    Vec3 node_coordinate(int node) const noexcept;
    /// Global node numbers of one tetrahedron, in LagrangeTet local order.
    std::span<const int> element_nodes(int tet) const noexcept {
        return {element_nodes_.data() + static_cast<std::size_t>(tet) * element_.size(),
                static_cast<std::size_t>(element_.size())};
    }

    bool is_constrained(int dof) const noexcept { return reduced_index_[dof] < 0; }
    int free_count() const noexcept { return static_cast<int>(free_dofs_.size()); }
    std::span<const int> free_dofs() const noexcept { return free_dofs_; }
    /// Position of each dof in the free set, -1 for constrained dofs.
    std::span<const int> reduced_index() const noexcept { return reduced_index_; }

    template <class T>
    std::vector<T> restrict_to_free(std::span<const T> full) const {
        if (full.size() != static_cast<std::size_t>(dof_count())) throw ShapeError("vector does not match space");
        std::vector<T> out(free_dofs_.size());
        for (std::size_t i = 0; i < free_dofs_.size(); ++i) out[i] = full[free_dofs_[i]];
        return out;
    }
    /// Constrained dofs receive zero.
    template <class T>
    std::vector<T> extend_from_free(std::span<const T> reduced) const {
        if (reduced.size() != free_dofs_.size()) throw ShapeError("reduced vector does not match free set");
        std::vector<T> out(dof_count(), T{});
        for (std::size_t i = 0; i < free_dofs_.size(); ++i) out[free_dofs_[i]] = reduced[i];
        return out;
    }

    /// Locates the tetrahedron containing x and its barycentric coordinates.
    std::pair<int, Bary> locate(const Vec3& x) const;

    /// Zero-valued sparsity of every form coupling this space with itself
    /// (all dofs, constrained ones included). Built on first use.
    const RealMatrix& pattern() const;

private:
    std::shared_ptr<const Mesh> mesh_;
    FieldKind kind_;
    int order_;
    BoundaryCondition bc_;
    LagrangeTet element_;
    int lattice_;
    std::vector<int> element_nodes_;
    std::vector<int> free_dofs_;
    std::vector<int> reduced_index_;
    mutable std::once_flag pattern_once_;
    mutable std::unique_ptr<RealMatrix> pattern_;
};

using SpacePtr = std::shared_ptr<const FeSpace>;

/// Coefficient field over the dofs of a space: double for real scalar and
/// vector spaces, std::complex<double> for complex scalar spaces.
template <class T>
class FeFunction {
public:
    FeFunction() = default;
    explicit FeFunction(SpacePtr space);
    FeFunction(SpacePtr space, std::vector<T> coefficients);

    const FeSpace& space() const noexcept { return *space_; }
    const SpacePtr& space_ptr() const noexcept { return space_; }
    std::span<const T> coefficients() const noexcept { return coeffs_; }
    std::span<T> coefficients() noexcept { return coeffs_; }

    /// Zeroes every constrained dof.
    void apply_constraints();

private:
    SpacePtr space_;
    std::vector<T> coeffs_;
};

using RealFunction = FeFunction<double>;
using ComplexFunction = FeFunction<cplx>;

/// Field values and first derivatives of a function on one element.
template <class T>
struct ScalarSample {
    T value{};
    std::array<T, 3> grad{};
};

struct VectorSample {
    Vec3 value{};
    std::array<Vec3, 3> jacobian{};  // jacobian[i][j] = d value_i / d x_j

    double divergence() const noexcept { return jacobian[0][0] + jacobian[1][1] + jacobian[2][2]; }
    Vec3 curl() const noexcept {
        return {jacobian[2][1] - jacobian[1][2], jacobian[0][2] - jacobian[2][0], jacobian[1][0] - jacobian[0][1]};
    }
};

/// Samples of a scalar function at every point of a bound tabulation.
template <class T>
void sample_scalar(const FeFunction<T>& f, int tet, const ElementTabulation& tab, std::vector<ScalarSample<T>>& out);
void sample_vector(const RealFunction& f, int tet, const ElementTabulation& tab, std::vector<VectorSample>& out);

/// Point evaluation anywhere in the closed unit cube.
template <class T>
ScalarSample<T> evaluate_scalar(const FeFunction<T>& f, const Vec3& x);
VectorSample evaluate_vector(const RealFunction& f, const Vec3& x);

using RealScalarFn = std::function<double(const Vec3&)>;
using ComplexScalarFn = std::function<cplx(const Vec3&)>;
using VectorFn = std::function<Vec3(const Vec3&)>;

/// Nodal interpolation followed by the space's constraints. Throws
/// EvaluationError carrying the node coordinate on a non-finite value.
RealFunction interpolate_scalar(const SpacePtr& space, const RealScalarFn& f);
ComplexFunction interpolate_scalar(const SpacePtr& space, const ComplexScalarFn& f);
/// Picks the real or complex overload from the callable's return type.
template <class F>
    requires(!std::is_same_v<std::decay_t<F>, RealScalarFn> && !std::is_same_v<std::decay_t<F>, ComplexScalarFn> &&
             std::is_invocable_v<const F&, const Vec3&>)
auto interpolate_scalar(const SpacePtr& space, const F& f) {
    using R = std::invoke_result_t<const F&, const Vec3&>;
    if constexpr (std::is_convertible_v<R, double>)
        return interpolate_scalar(space, RealScalarFn(f));
    else
        return interpolate_scalar(space, ComplexScalarFn(f));
}
RealFunction interpolate_vector(const SpacePtr& space, const VectorFn& f);

/// The four spaces used by the scheme on one mesh.
struct SpaceSet {
    std::shared_ptr<const Mesh> mesh;
    SpacePtr psi;         // complex, order r, Dirichlet
    SpacePtr phi;         // real, order r, Dirichlet
    SpacePtr vec;         // 3-vector, order 2, tangential
    SpacePtr multiplier;  // real, order 1, Dirichlet

    static SpaceSet make(std::shared_ptr<const Mesh> mesh, int order);
};

}  // namespace msc
