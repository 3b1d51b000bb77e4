#pragma once

#include <array>
#include <vector>

#include "msc/mesh.hpp"

namespace msc {

using Bary = std::array<double, 4>;

/// Quadrature on the reference tetrahedron, points given in barycentric
/// coordinates and weights summing to the reference volume 1/6.
struct QuadratureRule {
    std::vector<Bary> points;
    std::vector<double> weights;
    int degree = 0;

    int size() const noexcept { return static_cast<int>(points.size()); }
};

/// 24-point rule of Keast, exact for polynomials of total degree 6.
/// Every form and error norm in the library is integrated with it.
const QuadratureRule& keast_degree6();

inline constexpr int kMaxLocalNodes = 10;

/// Lagrange P1/P2 basis on a tetrahedron, expressed in barycentric coordinates.
///
/// Local node order: the four vertices, then the midpoints of the edges
/// (0,1), (0,2), (0,3), (1,2), (1,3), (2,3).
class LagrangeTet {
public:
    explicit LagrangeTet(int order);

    int order() const noexcept { return order_; }
    int size() const noexcept { return order_ == 1 ? 4 : 10; }
    const Bary& node(int a) const noexcept { return nodes_[a]; }

    /// Basis values at a barycentric point.
    std::array<double, kMaxLocalNodes> values(const Bary& x) const noexcept;
    /// Partial derivatives of each basis function with respect to the four
    /// barycentric coordinates (treated as independent variables).
    std::array<std::array<double, 4>, kMaxLocalNodes> bary_derivatives(const Bary& x) const noexcept;

private:
    int order_;
    std::array<Bary, kMaxLocalNodes> nodes_{};
};

inline constexpr std::array<std::array<int, 2>, 6> kTetEdges = {{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Affine map data of one tetrahedron.
struct TetGeometry {
    std::array<Vec3, 4> corners{};
    std::array<Vec3, 4> grad_bary{};  // constant gradients of the barycentric coordinates
    double volume = 0.0;              // signed

    static TetGeometry of(const Mesh& mesh, int tet);

    Vec3 to_physical(const Bary& x) const noexcept {
        Vec3 p{0.0, 0.0, 0.0};
        for (int v = 0; v < 4; ++v)
            for (int d = 0; d < 3; ++d) p[d] += x[v] * corners[v][d];
        return p;
    }
};

/// Values and physical gradients of every basis function at every point of a
/// quadrature rule, for one element. Reference values are cached; gradients
/// are rebuilt per element by `bind`.
class ElementTabulation {
public:
    ElementTabulation(const LagrangeTet& element, const QuadratureRule& rule);

    void bind(const TetGeometry& geometry);

    int points() const noexcept { return rule_->size(); }
    int basis() const noexcept { return element_->size(); }
    /// Quadrature weight times |det J| of the bound element.
    double weight(int q) const noexcept { return jw_[q]; }
    double value(int q, int a) const noexcept { return values_[q][a]; }
    const Vec3& grad(int q, int a) const noexcept { return grads_[q][a]; }
    const Vec3& point(int q) const noexcept { return physical_[q]; }

private:
    const LagrangeTet* element_;
    const QuadratureRule* rule_;
    std::vector<std::array<double, kMaxLocalNodes>> values_;
    std::vector<std::array<std::array<double, 4>, kMaxLocalNodes>> bary_derivs_;
    std::vector<std::array<Vec3, kMaxLocalNodes>> grads_;
    std::vector<Vec3> physical_;
    std::vector<double> jw_;
};

}  // namespace msc
