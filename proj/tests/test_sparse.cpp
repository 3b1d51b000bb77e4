#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "msc/assembly.hpp"
#include "msc/sparse.hpp"

using namespace msc;

namespace {

double residual(const RealMatrix& m, std::span<const double> x, std::span<const double> b) {
    const auto mx = m * x;
    double r = 0.0, n = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        r += (b[i] - mx[i]) * (b[i] - mx[i]);
        n += b[i] * b[i];
    }
    return std::sqrt(r / n);
}

double residual(const ComplexMatrix& m, std::span<const cplx> x, std::span<const cplx> b) {
    const auto mx = m * x;
    double r = 0.0, n = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        r += std::norm(b[i] - mx[i]);
        n += std::norm(b[i]);
    }
    return std::sqrt(r / n);
}

// Reduced Laplacian on the interior of a P1 space.
RealMatrix laplacian(int n) {
    auto mesh = std::make_shared<const Mesh>(n);
    FeSpace s(mesh, FieldKind::ScalarReal, 1, BoundaryCondition::Dirichlet);
    return reduce(assemble_scalar_stiffness(s), s, s);
}

}  // namespace

TEST_CASE("triplet consolidation and pattern access") {
    std::vector<Triplet<double>> t{{0, 1, 1.0}, {0, 1, 2.0}, {1, 0, 4.0}, {2, 2, 5.0}};
    auto m = RealMatrix::from_triplets(3, 3, t);
    CHECK(m.nnz() == 3);
    CHECK(m.coeff(0, 1) == 3.0);
    CHECK(m.coeff(1, 1) == 0.0);
    CHECK(m.find(1, 1) == -1);
    CHECK_THROWS_AS(m.add(1, 1, 1.0), ShapeError);
    m.add(2, 2, 1.0);
    CHECK(m.coeff(2, 2) == 6.0);
    const auto tr = m.transpose();
    CHECK(tr.coeff(1, 0) == 3.0);
    CHECK(tr.coeff(0, 1) == 4.0);
    CHECK_THROWS_AS(m.declare(Structure::Symmetric), InvalidArgument);
    CHECK_THROWS_AS(RealMatrix(2, 2, {0, 2, 2}, {1, 0}, {1.0, 1.0}), ShapeError);
}

TEST_CASE("identity solve returns the right-hand side") {
    const auto id = RealMatrix::identity(5);
    const std::vector<double> b{1, -2, 3, 0.5, 7};
    for (auto method : {SolverMethod::Direct, SolverMethod::Iterative}) {
        const auto sol = solve_spd(id, b, {method});
        for (int i = 0; i < 5; ++i) CHECK(sol.x[i] == doctest::Approx(b[i]));
    }
}

TEST_CASE("SPD solve recovers a manufactured solution") {
    const RealMatrix k = laplacian(2);
    std::vector<double> ones(k.rows(), 1.0);
    const auto b = k * std::span<const double>(ones);
    for (auto method : {SolverMethod::Direct, SolverMethod::Iterative}) {
        SolverOptions opt{method};
        const auto sol = solve_spd(k, b, opt);
        for (double x : sol.x) CHECK(std::abs(x - 1.0) <= 1e-9);
        CHECK(sol.report.residual <= opt.effective_tol());
        CHECK(std::abs(sol.report.residual - residual(k, sol.x, b)) <= 1e-10 * std::max(1e-30, sol.report.residual) + 1e-16);
    }
}

TEST_CASE("complex solve: tau = 0 gives the mass solve, random systems recover x") {
    auto mesh = std::make_shared<const Mesh>(3);
    FeSpace s(mesh, FieldKind::ScalarComplex, 2, BoundaryCondition::Dirichlet);
    const RealMatrix w = reduce(assemble_scalar_mass(s), s, s);
    const ComplexMatrix wc = ComplexMatrix::zeros_like(w);
    ComplexMatrix m = wc;
    for (int i = 0; i < w.nnz(); ++i) m.values()[i] = w.values()[i];
    std::mt19937_64 rng(5);
    std::normal_distribution<double> d;
    std::vector<cplx> c(m.rows());
    for (auto& v : c) v = {d(rng), d(rng)};
    const auto b = m * std::span<const cplx>(c);
    for (auto method : {SolverMethod::Direct, SolverMethod::Iterative}) {
        SolverOptions opt{method};
        const auto sol = solve_hermitian(m, b, opt);
        double err = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) err = std::max(err, std::abs(sol.x[i] - c[i]));
        CHECK(err <= 1e-8);
        CHECK(std::abs(sol.report.residual - residual(m, sol.x, b)) <= 1e-10 * std::max(1e-20, sol.report.residual) + 1e-16);
    }

    // Shifted system W + i s K with a Hermitian K.
    const RealMatrix kk = reduce(assemble_scalar_stiffness(s), s, s);
    ComplexMatrix shifted = m;
    for (int r = 0; r < kk.rows(); ++r)
        for (int p = kk.row_ptr()[r]; p < kk.row_ptr()[r + 1]; ++p)
            shifted.add(r, kk.col_index()[p], cplx(0.0, 0.05 * kk.values()[p]));
    const auto b2 = shifted * std::span<const cplx>(c);
    for (auto method : {SolverMethod::Direct, SolverMethod::Iterative}) {
        const auto sol = solve_hermitian(shifted, b2, {method});
        double err = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) err = std::max(err, std::abs(sol.x[i] - c[i]));
        CHECK(err <= 1e-7);
    }
}

TEST_CASE("saddle solve") {
    auto mesh = std::make_shared<const Mesh>(2);
    const SpaceSet s = SpaceSet::make(mesh, 2);
    const RealMatrix k = reduce(assemble_maxwell_operator(*s.vec), *s.vec, *s.vec);
    const RealMatrix b = reduce(assemble_div_pairing(*s.multiplier, *s.vec), *s.multiplier, *s.vec);
    const int n = k.rows(), m = b.rows();

    SUBCASE("zero right-hand side") {
        const auto sol = solve_saddle(k, b, std::vector<double>(n, 0.0), std::vector<double>(m, 0.0));
        for (double v : sol.primal) CHECK(v == 0.0);
        for (double v : sol.multiplier) CHECK(v == 0.0);
    }
    SUBCASE("consistency with a discretely divergence-free field") {
        // Build v* in ker B by solving with an arbitrary load, then use K v* as the load.
        std::vector<double> f(n);
        for (int i = 0; i < n; ++i) f[i] = std::sin(0.3 * i);
        const auto first = solve_saddle(k, b, f, std::vector<double>(m, 0.0));
        const auto kv = k * std::span<const double>(first.primal);
        for (auto method : {SolverMethod::Direct, SolverMethod::Iterative}) {
            const auto sol = solve_saddle(k, b, kv, std::vector<double>(m, 0.0), {method});
            double err = 0.0, scale = 0.0, pmax = 0.0;
            for (int i = 0; i < n; ++i) {
                err = std::max(err, std::abs(sol.primal[i] - first.primal[i]));
                scale = std::max(scale, std::abs(first.primal[i]));
            }
            for (double p : sol.multiplier) pmax = std::max(pmax, std::abs(p));
            CHECK(err <= 1e-8 * scale);
            CHECK(pmax <= 1e-8);
            const auto bx = b * std::span<const double>(sol.primal);
            for (double v : bx) CHECK(std::abs(v) <= 1e-9 * scale);
        }
    }
    SUBCASE("rank-deficient constraint block") {
        RealMatrix bad = b;
        for (int p = bad.row_ptr()[0]; p < bad.row_ptr()[1]; ++p) bad.values()[p] = 0.0;
        CHECK_THROWS_AS(solve_saddle(k, bad, std::vector<double>(n, 1.0), std::vector<double>(m, 0.0)),
                        InfSupFailure);
        // Duplicate row: structurally fine, numerically singular.
        std::vector<Triplet<double>> trip;
        for (int r = 0; r < m; ++r)
            for (int p = b.row_ptr()[r]; p < b.row_ptr()[r + 1]; ++p)
                trip.push_back({r, b.col_index()[p], b.values()[p]});
        for (int p = b.row_ptr()[0]; p < b.row_ptr()[1]; ++p) trip.push_back({m, b.col_index()[p], b.values()[p]});
        const auto dup = RealMatrix::from_triplets(m + 1, n, trip);
        CHECK_THROWS_AS(solve_saddle(k, dup, std::vector<double>(n, 1.0), std::vector<double>(m + 1, 0.0)),
                        SolverBreakdown);
    }
}

TEST_CASE("iterative solver reports breakdown when capped") {
    const RealMatrix k = laplacian(4);
    std::vector<double> b(k.rows(), 1.0);
    SolverOptions opt{SolverMethod::Iterative, 1e-14, 2};
    CHECK_THROWS_AS(solve_spd(k, b, opt), SolverBreakdown);
    try {
        solve_spd(k, b, opt);
    } catch (const SolverBreakdown& e) {
        CHECK(e.report().breakdown);
        CHECK(e.report().iterations == 2);
    }
}

TEST_CASE("mass matrices are positive definite by inverse power iteration") {
    for (int n : {1, 2, 3, 4}) {
        auto mesh = std::make_shared<const Mesh>(n);
        const SpaceSet s = SpaceSet::make(mesh, 2);
        for (const RealMatrix& m : {reduce(assemble_scalar_mass(*s.phi), *s.phi, *s.phi),
                                    reduce(assemble_vector_mass(*s.vec), *s.vec, *s.vec)}) {
            if (m.rows() == 0) continue;
            SpdSolver solver(m);
            std::vector<double> x(m.rows(), 1.0);
            double lambda = 0.0;
            for (int it = 0; it < 50; ++it) {
                const double nx = norm2(x);
                for (auto& v : x) v /= nx;
                auto y = solver.solve(x).x;
                lambda = 1.0 / norm2(y);
                x = std::move(y);
            }
            CHECK(lambda > 0.0);
        }
    }
}

TEST_CASE("matrix market dump") {
    std::vector<Triplet<cplx>> t{{0, 0, {1.0, 2.0}}, {1, 0, {0.0, -1.0}}};
    const auto m = ComplexMatrix::from_triplets(2, 2, t);
    std::ostringstream out;
    write_matrix_market(out, m);
    const std::string s = out.str();
    CHECK(s.rfind("%%MatrixMarket matrix coordinate complex general", 0) == 0);
    CHECK(s.find("2 2 2") != std::string::npos);
}
