#include <cmath>
#include <random>

#include "doctest.h"
#include "msc/element.hpp"
#include "oracles.hpp"

using namespace msc;

TEST_CASE("quadrature weights sum to the reference volume") {
    const auto& rule = keast_degree6();
    CHECK(rule.size() == 24);
    CHECK(rule.degree == 6);
    double s = 0.0;
    for (double w : rule.weights) s += w;
    CHECK(std::abs(s - 1.0 / 6.0) <= 1e-15);
    for (const auto& p : rule.points) {
        CHECK(std::abs(p[0] + p[1] + p[2] + p[3] - 1.0) <= 1e-15);
        for (double c : p) CHECK(c >= 0.0);
    }
}

TEST_CASE("quadrature integrates monomials up to degree 6 exactly") {
    const auto& rule = keast_degree6();
    for (int a = 0; a <= 6; ++a)
        for (int b = 0; a + b <= 6; ++b)
            for (int c = 0; a + b + c <= 6; ++c) {
                double s = 0.0;
                for (int q = 0; q < rule.size(); ++q) {
                    const auto& p = rule.points[q];
                    s += rule.weights[q] * std::pow(p[1], a) * std::pow(p[2], b) * std::pow(p[3], c);
                }
                INFO("monomial " << a << " " << b << " " << c);
                CHECK(std::abs(s - oracle::simplex_monomial(a, b, c)) <= 1e-13);
            }
}

TEST_CASE("quadrature is not exact at degree 7 or 8") {
    const auto& rule = keast_degree6();
    double worst = 0.0;
    for (int a = 0; a <= 8; ++a) {
        const int b = 8 - a;
        double s = 0.0;
        for (int q = 0; q < rule.size(); ++q) s += rule.weights[q] * std::pow(rule.points[q][1], a) * std::pow(rule.points[q][2], b);
        worst = std::max(worst, std::abs(s - oracle::simplex_monomial(a, b, 0)));
    }
    CHECK(worst > 1e-10);
}

TEST_CASE("Kronecker property and partition of unity") {
    for (int order : {1, 2}) {
        const LagrangeTet el(order);
        for (int j = 0; j < el.size(); ++j) {
            const auto v = el.values(el.node(j));
            for (int i = 0; i < el.size(); ++i) CHECK(std::abs(v[i] - (i == j ? 1.0 : 0.0)) <= 1e-14);
        }
        for (const auto& p : keast_degree6().points) {
            const auto v = el.values(p);
            double s = 0.0;
            for (int i = 0; i < el.size(); ++i) s += v[i];
            CHECK(std::abs(s - 1.0) <= 1e-14);
        }
    }
}

TEST_CASE("physical gradients match finite differences") {
    const Mesh mesh = build_unit_cube_mesh(2);
    std::mt19937_64 rng(7);
    for (int order : {1, 2}) {
        const LagrangeTet el(order);
        ElementTabulation tab(el, keast_degree6());
        for (int t : {0, 5, 17, 40}) {
            const TetGeometry g = TetGeometry::of(mesh, t);
            tab.bind(g);
            for (int q = 0; q < tab.points(); q += 5) {
                const Vec3 x = tab.point(q);
                // Barycentric coordinates of a physical point.
                auto bary = [&](const Vec3& y) {
                    Bary b{};
                    double s = 0.0;
                    for (int v = 1; v < 4; ++v) {
                        double d = 0.0;
                        for (int k = 0; k < 3; ++k) d += g.grad_bary[v][k] * (y[k] - g.corners[0][k]);
                        b[v] = d;
                        s += d;
                    }
                    b[0] = 1.0 - s;
                    return b;
                };
                for (int a = 0; a < el.size(); ++a) {
                    auto f = [&](const Vec3& y) { return el.values(bary(y))[a]; };
                    for (int d = 0; d < 3; ++d)
                        CHECK(tab.grad(q, a)[d] == doctest::Approx(oracle::central_diff(f, x, d, 1e-6)).epsilon(1e-7));
                }
            }
            double wsum = 0.0;
            for (int q = 0; q < tab.points(); ++q) wsum += tab.weight(q);
            CHECK(wsum == doctest::Approx(g.volume).epsilon(1e-14));
        }
    }
}
