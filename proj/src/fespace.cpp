#include "msc/fespace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace msc {

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, FieldKind kind, int order, BoundaryCondition bc)
    : mesh_(std::move(mesh)), kind_(kind), order_(order), bc_(bc), element_(order) {
    if (!mesh_) throw InvalidArgument("space needs a mesh");
    if (bc_ == BoundaryCondition::Tangential && kind_ != FieldKind::Vector3)
        throw InvalidArgument("tangential constraints apply to vector spaces only");
    const int n = mesh_->subdivisions();
    lattice_ = order_ * n + 1;

    const int nloc = element_.size();
    element_nodes_.resize(static_cast<std::size_t>(mesh_->tet_count()) * nloc);
    auto node_of = [this](const Lattice3& p) { return p[0] + lattice_ * (p[1] + lattice_ * p[2]); };
    for (int t = 0; t < mesh_->tet_count(); ++t) {
        std::array<Lattice3, 4> corner{};
        for (int v = 0; v < 4; ++v) {
            const Lattice3 p = mesh_->vertex_lattice(mesh_->tets()[t][v]);
            for (int d = 0; d < 3; ++d) corner[v][d] = order_ * p[d];
        }
        int* out = element_nodes_.data() + static_cast<std::size_t>(t) * nloc;
        for (int v = 0; v < 4; ++v) out[v] = node_of(corner[v]);
        if (order_ == 2)
            for (int e = 0; e < 6; ++e) {
                const auto& a = corner[kTetEdges[e][0]];
                const auto& b = corner[kTetEdges[e][1]];
                out[4 + e] = node_of({(a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2});
            }
    }

    const int comps = components();
    reduced_index_.assign(static_cast<std::size_t>(node_count()) * comps, 0);
    const int last = lattice_ - 1;
    for (int node = 0; node < node_count(); ++node) {
        const Lattice3 p = node_lattice(node);
        for (int axis = 0; axis < 3; ++axis) {
            if (p[axis] != 0 && p[axis] != last) continue;
            if (bc_ == BoundaryCondition::Dirichlet) {
                for (int c = 0; c < comps; ++c) reduced_index_[dof(node, c)] = -1;
            } else if (bc_ == BoundaryCondition::Tangential) {
                for (int c = 0; c < 3; ++c)
                    if (c != axis) reduced_index_[dof(node, c)] = -1;
            }
        }
    }
    for (int d = 0; d < static_cast<int>(reduced_index_.size()); ++d) {
        if (reduced_index_[d] < 0) continue;
        reduced_index_[d] = static_cast<int>(free_dofs_.size());
        free_dofs_.push_back(d);
    }
}

Lattice3 FeSpace::node_lattice(int node) const noexcept {
    return {node % lattice_, (node / lattice_) % lattice_, node / (lattice_ * lattice_)};
}

Vec3 FeSpace::node_coordinate(int node) const noexcept {
    const Lattice3 p = node_lattice(node);
    const double step = 1.0 / (lattice_ - 1);
    return {p[0] * step, p[1] * step, p[2] * step};
}

std::pair<int, Bary> FeSpace::locate(const Vec3& x) const {
    const int n = mesh_->subdivisions();
    for (double c : x)
        if (!(c >= -1e-12 && c <= 1.0 + 1e-12)) throw InvalidArgument("point outside the unit cube");
    Lattice3 cell{};
    for (int d = 0; d < 3; ++d) cell[d] = std::clamp(static_cast<int>(std::floor(x[d] * n)), 0, n - 1);
    const int first = 6 * (cell[0] + n * (cell[1] + n * cell[2]));
    int best = first;
    Bary best_bary{};
    double best_min = -1e300;
    for (int t = first; t < first + 6; ++t) {
        const TetGeometry g = TetGeometry::of(*mesh_, t);
        Bary b{};
        double sum = 0.0;
        for (int v = 1; v < 4; ++v) {
            double s = 0.0;
            for (int d = 0; d < 3; ++d) s += g.grad_bary[v][d] * (x[d] - g.corners[0][d]);
            b[v] = s;
            sum += s;
        }
        b[0] = 1.0 - sum;
        const double mn = *std::min_element(b.begin(), b.end());
        if (mn > best_min) {
            best_min = mn;
            best = t;
            best_bary = b;
        }
    }
    return {best, best_bary};
}

const RealMatrix& FeSpace::pattern() const {
    std::call_once(pattern_once_, [this] {
        const int comps = components();
        const int nloc = element_.size() * comps;
        PatternBuilder builder(dof_count(), dof_count());
        std::vector<int> dofs(nloc);
        for (int t = 0; t < mesh_->tet_count(); ++t) {
            const auto nodes = element_nodes(t);
            for (int a = 0; a < element_.size(); ++a)
                for (int c = 0; c < comps; ++c) dofs[a * comps + c] = dof(nodes[a], c);
            builder.add_block(dofs, dofs);
        }
        pattern_ = std::make_unique<RealMatrix>(builder.build<double>());
    });
    return *pattern_;
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
void check_kind(const FeSpace& space) {
    if constexpr (std::is_same_v<T, cplx>) {
        if (space.kind() != FieldKind::ScalarComplex) throw InvalidArgument("complex coefficients need a complex space");
    } else {
        if (space.kind() == FieldKind::ScalarComplex) throw InvalidArgument("complex space needs complex coefficients");
    }
}

}  // namespace

template <class T>
FeFunction<T>::FeFunction(SpacePtr space) : space_(std::move(space)) {
    if (!space_) throw InvalidArgument("function needs a space");
    check_kind<T>(*space_);
    coeffs_.assign(space_->dof_count(), T{});
}

template <class T>
FeFunction<T>::FeFunction(SpacePtr space, std::vector<T> coefficients)
    : space_(std::move(space)), coeffs_(std::move(coefficients)) {
    if (!space_) throw InvalidArgument("function needs a space");
    check_kind<T>(*space_);
    if (coeffs_.size() != static_cast<std::size_t>(space_->dof_count()))
        throw ShapeError("coefficient count does not match the space");
}

template <class T>
void FeFunction<T>::apply_constraints() {
    for (int d = 0; d < space_->dof_count(); ++d)
        if (space_->is_constrained(d)) coeffs_[d] = T{};
}

template class FeFunction<double>;
template class FeFunction<cplx>;

template <class T>
void sample_scalar(const FeFunction<T>& f, int tet, const ElementTabulation& tab, std::vector<ScalarSample<T>>& out) {
    const FeSpace& space = f.space();
    if (space.components() != 1) throw ShapeError("scalar sampling of a vector function");
    const auto nodes = space.element_nodes(tet);
    const auto c = f.coefficients();
    out.assign(tab.points(), ScalarSample<T>{});
    for (int q = 0; q < tab.points(); ++q) {
        auto& s = out[q];
        for (int a = 0; a < tab.basis(); ++a) {
            const T ca = c[nodes[a]];
            s.value += ca * tab.value(q, a);
            const Vec3& g = tab.grad(q, a);
            for (int d = 0; d < 3; ++d) s.grad[d] += ca * g[d];
        }
    }
}

template void sample_scalar<double>(const RealFunction&, int, const ElementTabulation&,
                                    std::vector<ScalarSample<double>>&);
template void sample_scalar<cplx>(const ComplexFunction&, int, const ElementTabulation&,
                                  std::vector<ScalarSample<cplx>>&);

void sample_vector(const RealFunction& f, int tet, const ElementTabulation& tab, std::vector<VectorSample>& out) {
    const FeSpace& space = f.space();
    if (space.components() != 3) throw ShapeError("vector sampling of a scalar function");
    const auto nodes = space.element_nodes(tet);
    const auto c = f.coefficients();
    out.assign(tab.points(), VectorSample{});
    for (int q = 0; q < tab.points(); ++q) {
        auto& s = out[q];
        for (int a = 0; a < tab.basis(); ++a) {
            const double phi = tab.value(q, a);
            const Vec3& g = tab.grad(q, a);
            for (int i = 0; i < 3; ++i) {
                const double ca = c[3 * nodes[a] + i];
                s.value[i] += ca * phi;
                for (int j = 0; j < 3; ++j) s.jacobian[i][j] += ca * g[j];
            }
        }
    }
}

namespace {

// Single-point tabulation at a barycentric location.
struct PointTab {
    std::array<double, kMaxLocalNodes> value{};
    std::array<Vec3, kMaxLocalNodes> grad{};
};

PointTab tabulate_point(const FeSpace& space, int tet, const Bary& b) {
    PointTab pt;
    const TetGeometry g = TetGeometry::of(space.mesh(), tet);
    pt.value = space.element().values(b);
    const auto d = space.element().bary_derivatives(b);
    for (int a = 0; a < space.element().size(); ++a) {
        Vec3 gr{0.0, 0.0, 0.0};
        for (int v = 0; v < 4; ++v)
            for (int k = 0; k < 3; ++k) gr[k] += d[a][v] * g.grad_bary[v][k];
        pt.grad[a] = gr;
    }
    return pt;
}

}  // namespace

template <class T>
ScalarSample<T> evaluate_scalar(const FeFunction<T>& f, const Vec3& x) {
    const FeSpace& space = f.space();
    if (space.components() != 1) throw ShapeError("scalar evaluation of a vector function");
    const auto [tet, b] = space.locate(x);
    const PointTab pt = tabulate_point(space, tet, b);
    const auto nodes = space.element_nodes(tet);
    ScalarSample<T> s;
    for (int a = 0; a < space.element().size(); ++a) {
        const T ca = f.coefficients()[nodes[a]];
        s.value += ca * pt.value[a];
        for (int d = 0; d < 3; ++d) s.grad[d] += ca * pt.grad[a][d];
    }
    return s;
}

template ScalarSample<double> evaluate_scalar<double>(const RealFunction&, const Vec3&);
template ScalarSample<cplx> evaluate_scalar<cplx>(const ComplexFunction&, const Vec3&);

VectorSample evaluate_vector(const RealFunction& f, const Vec3& x) {
    const FeSpace& space = f.space();
    if (space.components() != 3) throw ShapeError("vector evaluation of a scalar function");
    const auto [tet, b] = space.locate(x);
    const PointTab pt = tabulate_point(space, tet, b);
    const auto nodes = space.element_nodes(tet);
    VectorSample s;
    for (int a = 0; a < space.element().size(); ++a)
        for (int i = 0; i < 3; ++i) {
            const double ca = f.coefficients()[3 * nodes[a] + i];
            s.value[i] += ca * pt.value[a];
            for (int j = 0; j < 3; ++j) s.jacobian[i][j] += ca * pt.grad[a][j];
        }
    return s;
}

namespace {

[[noreturn]] void non_finite(const Vec3& x) {
    throw EvaluationError("non-finite value at node (" + std::to_string(x[0]) + ", " + std::to_string(x[1]) + ", " +
                              std::to_string(x[2]) + ")",
                          x[0], x[1], x[2]);
}

}  // namespace

RealFunction interpolate_scalar(const SpacePtr& space, const RealScalarFn& f) {
    RealFunction out(space);
    if (space->components() != 1) throw ShapeError("scalar interpolation into a vector space");
    for (int node = 0; node < space->node_count(); ++node) {
        const Vec3 x = space->node_coordinate(node);
        const double v = f(x);
        if (!std::isfinite(v)) non_finite(x);
        out.coefficients()[node] = v;
    }
    out.apply_constraints();
    return out;
}

ComplexFunction interpolate_scalar(const SpacePtr& space, const ComplexScalarFn& f) {
    ComplexFunction out(space);
    for (int node = 0; node < space->node_count(); ++node) {
        const Vec3 x = space->node_coordinate(node);
        const cplx v = f(x);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) non_finite(x);
        out.coefficients()[node] = v;
    }
    out.apply_constraints();
    return out;
}

RealFunction interpolate_vector(const SpacePtr& space, const VectorFn& f) {
    RealFunction out(space);
    if (space->components() != 3) throw ShapeError("vector interpolation into a scalar space");
    for (int node = 0; node < space->node_count(); ++node) {
        const Vec3 x = space->node_coordinate(node);
        const Vec3 v = f(x);
        for (int c = 0; c < 3; ++c) {
            if (!std::isfinite(v[c])) non_finite(x);
            out.coefficients()[3 * node + c] = v[c];
        }
    }
    out.apply_constraints();
    return out;
}

SpaceSet SpaceSet::make(std::shared_ptr<const Mesh> mesh, int order) {
    SpaceSet s;
    s.mesh = mesh;
    s.psi = std::make_shared<FeSpace>(mesh, FieldKind::ScalarComplex, order, BoundaryCondition::Dirichlet);
    s.phi = std::make_shared<FeSpace>(mesh, FieldKind::ScalarReal, order, BoundaryCondition::Dirichlet);
    s.vec = std::make_shared<FeSpace>(mesh, FieldKind::Vector3, 2, BoundaryCondition::Tangential);
    s.multiplier = std::make_shared<FeSpace>(mesh, FieldKind::ScalarReal, 1, BoundaryCondition::Dirichlet);
    return s;
}

}  // namespace msc
