#include "msc/element.hpp"

#include <cmath>

#include "msc/errors.hpp"

namespace msc {

namespace {

QuadratureRule make_keast6() {
    QuadratureRule rule;
    rule.degree = 6;
    auto add_orbit4 = [&](double a, double w) {
        const double b = 1.0 - 3.0 * a;
        for (int v = 0; v < 4; ++v) {
            Bary p{a, a, a, a};
            p[v] = b;
            rule.points.push_back(p);
            rule.weights.push_back(w);
        }
    };
    add_orbit4(0.214602871259151684, 0.00665379170969464506);
    add_orbit4(0.0406739585346113397, 0.00167953517588677620);
    add_orbit4(0.322337890142275646, 0.00922619692394239843);
    // 12 distinct permutations of (a, a, b, c).
    const double a = 0.0636610018750175299;
    const double b = 0.269672331458315867;
    const double c = 0.603005664791649076;
    const double w = 0.00803571428571428248;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (j == i) continue;
            Bary p{a, a, a, a};
            p[i] = b;
            p[j] = c;
            rule.points.push_back(p);
            rule.weights.push_back(w);
        }
    return rule;
}

}  // namespace

const QuadratureRule& keast_degree6() {
    static const QuadratureRule rule = make_keast6();
    return rule;
}

LagrangeTet::LagrangeTet(int order) : order_(order) {
    if (order != 1 && order != 2) throw InvalidArgument("Lagrange order must be 1 or 2");
    for (int v = 0; v < 4; ++v) {
        nodes_[v] = {0.0, 0.0, 0.0, 0.0};
        nodes_[v][v] = 1.0;
    }
    if (order_ == 2)
        for (int e = 0; e < 6; ++e) {
            nodes_[4 + e] = {0.0, 0.0, 0.0, 0.0};
            nodes_[4 + e][kTetEdges[e][0]] = 0.5;
            nodes_[4 + e][kTetEdges[e][1]] = 0.5;
        }
}

std::array<double, kMaxLocalNodes> LagrangeTet::values(const Bary& x) const noexcept {
    std::array<double, kMaxLocalNodes> phi{};
    if (order_ == 1) {
        for (int v = 0; v < 4; ++v) phi[v] = x[v];
        return phi;
    }
    for (int v = 0; v < 4; ++v) phi[v] = x[v] * (2.0 * x[v] - 1.0);
    for (int e = 0; e < 6; ++e) phi[4 + e] = 4.0 * x[kTetEdges[e][0]] * x[kTetEdges[e][1]];
    return phi;
}

std::array<std::array<double, 4>, kMaxLocalNodes> LagrangeTet::bary_derivatives(const Bary& x) const noexcept {
    std::array<std::array<double, 4>, kMaxLocalNodes> d{};
    if (order_ == 1) {
        for (int v = 0; v < 4; ++v) d[v][v] = 1.0;
        return d;
    }
    for (int v = 0; v < 4; ++v) d[v][v] = 4.0 * x[v] - 1.0;
    for (int e = 0; e < 6; ++e) {
        const int i = kTetEdges[e][0];
        const int j = kTetEdges[e][1];
        d[4 + e][i] = 4.0 * x[j];
        d[4 + e][j] = 4.0 * x[i];
    }
    return d;
}

TetGeometry TetGeometry::of(const Mesh& mesh, int tet) {
    TetGeometry g;
    const auto& t = mesh.tets()[tet];
    for (int v = 0; v < 4; ++v) g.corners[v] = mesh.vertices()[t[v]];
    double jac[3][3];  // columns are edge vectors x_s - x_0
    for (int s = 0; s < 3; ++s)
        for (int d = 0; d < 3; ++d) jac[d][s] = g.corners[s + 1][d] - g.corners[0][d];
    const double det = jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1]) -
                       jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0]) +
                       jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]);
    g.volume = det / 6.0;
    // Rows of J^{-1} are the gradients of barycentric coordinates 1..3.
    double inv[3][3];
    inv[0][0] = (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1]) / det;
    inv[0][1] = (jac[0][2] * jac[2][1] - jac[0][1] * jac[2][2]) / det;
    inv[0][2] = (jac[0][1] * jac[1][2] - jac[0][2] * jac[1][1]) / det;
    inv[1][0] = (jac[1][2] * jac[2][0] - jac[1][0] * jac[2][2]) / det;
    inv[1][1] = (jac[0][0] * jac[2][2] - jac[0][2] * jac[2][0]) / det;
    inv[1][2] = (jac[0][2] * jac[1][0] - jac[0][0] * jac[1][2]) / det;
    inv[2][0] = (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]) / det;
    inv[2][1] = (jac[0][1] * jac[2][0] - jac[0][0] * jac[2][1]) / det;
    inv[2][2] = (jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]) / det;
    g.grad_bary[0] = {0.0, 0.0, 0.0};
    for (int s = 0; s < 3; ++s) {
        for (int d = 0; d < 3; ++d) {
            g.grad_bary[s + 1][d] = inv[s][d];
            g.grad_bary[0][d] -= inv[s][d];
        }
    }
    return g;
}

ElementTabulation::ElementTabulation(const LagrangeTet& element, const QuadratureRule& rule)
    : element_(&element), rule_(&rule) {
    const int nq = rule.size();
    values_.resize(nq);
    bary_derivs_.resize(nq);
    grads_.resize(nq);
    physical_.resize(nq);
    jw_.resize(nq);
    for (int q = 0; q < nq; ++q) {
        values_[q] = element.values(rule.points[q]);
        bary_derivs_[q] = element.bary_derivatives(rule.points[q]);
    }
}

void ElementTabulation::bind(const TetGeometry& geometry) {
    const int nq = rule_->size();
    const int nb = element_->size();
    const double jac = 6.0 * std::abs(geometry.volume);
    for (int q = 0; q < nq; ++q) {
        jw_[q] = rule_->weights[q] * jac;
        physical_[q] = geometry.to_physical(rule_->points[q]);
        for (int a = 0; a < nb; ++a) {
            Vec3 g{0.0, 0.0, 0.0};
            for (int v = 0; v < 4; ++v) {
                const double dv = bary_derivs_[q][a][v];
                if (dv == 0.0) continue;
                for (int d = 0; d < 3; ++d) g[d] += dv * geometry.grad_bary[v][d];
            }
            grads_[q][a] = g;
        }
    }
}

}  // namespace msc
