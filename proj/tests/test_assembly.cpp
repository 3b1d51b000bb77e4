#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "msc/assembly.hpp"
#include "oracles.hpp"

using namespace msc;
using std::numbers::pi;

namespace {

const cplx I(0.0, 1.0);

std::shared_ptr<const Mesh> mesh_of(int n) { return std::make_shared<const Mesh>(n); }

SpacePtr make(const std::shared_ptr<const Mesh>& m, FieldKind kind, int order, BoundaryCondition bc) {
    return std::make_shared<const FeSpace>(m, kind, order, bc);
}

template <class T>
T form(const CsrMatrix<T>& m, std::span<const T> u, std::span<const T> v) {
    const auto mv = m * v;
    T s{};
    for (std::size_t i = 0; i < u.size(); ++i) {
        if constexpr (std::is_same_v<T, cplx>)
            s += std::conj(u[i]) * mv[i];
        else
            s += u[i] * mv[i];
    }
    return s;
}

cplx form_rc(const RealMatrix& m, std::span<const cplx> u, std::span<const cplx> v) {
    const auto mv = multiply(m, v);
    cplx s{};
    for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * mv[i];
    return s;
}

std::vector<double> random_real(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

std::vector<cplx> random_complex(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    std::vector<cplx> v(n);
    for (auto& x : v) x = {g(rng), g(rng)};
    return v;
}

// Integral over the mesh of an integrand evaluated tet by tet at strictly interior points.
double integrate_mesh(const Mesh& m, const std::function<double(const Vec3&)>& f, int n = 5) {
    double s = 0.0;
    for (int t = 0; t < m.tet_count(); ++t) {
        std::array<oracle::Vec3, 4> c;
        for (int v = 0; v < 4; ++v) c[v] = m.vertices()[m.tets()[t][v]];
        s += oracle::integrate_tet(c, f, n);
    }
    return s;
}

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace

TEST_CASE("integrand degrees and quadrature flags") {
    CHECK(integrand_degree(FormKind::ScalarMass, 2) == 4);
    CHECK(integrand_degree(FormKind::CurlCurl, 1) == 2);
    CHECK(integrand_degree(FormKind::WeightedVectorMass, 1) == 6);
    CHECK(integrand_degree(FormKind::WeightedVectorMass, 2) == 8);
    CHECK(integrand_degree(FormKind::MagneticSchrodinger, 2) == 8);
    CHECK_FALSE(is_under_integrated(FormKind::MagneticSchrodinger, 1));
    CHECK(is_under_integrated(FormKind::MagneticSchrodinger, 2));
    CHECK(is_under_integrated(FormKind::WeightedVectorMass, 2));
    CHECK(is_under_integrated(FormKind::GenericLoad, 1));
    for (auto k : {FormKind::ScalarMass, FormKind::ScalarStiffness, FormKind::VectorMass, FormKind::CurlCurl,
                   FormKind::DivDiv, FormKind::DivPairing})
        for (int r : {1, 2}) CHECK_FALSE(is_under_integrated(k, r));
    CHECK(form_name(FormKind::DivPairing) == "DivPairing");
}

TEST_CASE("bilinear forms of reproduced polynomials match exact integrals") {
    const auto m = mesh_of(2);
    const auto s2 = make(m, FieldKind::ScalarReal, 2, BoundaryCondition::None);
    const auto s1 = make(m, FieldKind::ScalarReal, 1, BoundaryCondition::None);
    const auto v2 = make(m, FieldKind::Vector3, 2, BoundaryCondition::None);

    const auto p = [](const Vec3& x) { return x[0] * x[0] + x[1] * x[2]; };
    const auto f1 = [](const Vec3& x) { return Vec3{x[1] * x[1], x[2] * x[0], x[0] * x[1]}; };
    const auto f2 = [](const Vec3& x) { return Vec3{x[0] * x[0], x[1] * x[2], x[0] * x[2]}; };
    const auto q = [](const Vec3& x) { return 1.0 + x[0] + 2.0 * x[1]; };
    const auto u = interpolate_scalar(s2, p);
    const auto c1 = interpolate_vector(v2, f1);
    const auto c2 = interpolate_vector(v2, f2);
    const auto qh = interpolate_scalar(s1, q);
    const auto uc = u.coefficients();

    SUBCASE("scalar mass and stiffness") {
        const double mass = oracle::integrate_cube([&](const Vec3& x) { return p(x) * p(x); }, 2);
        const double stiff = oracle::integrate_cube(
            [&](const Vec3& x) { return 4 * x[0] * x[0] + x[2] * x[2] + x[1] * x[1]; }, 2);
        CHECK(form<double>(assemble_scalar_mass(*s2), uc, uc) == doctest::Approx(mass).epsilon(1e-13));
        CHECK(form<double>(assemble_scalar_stiffness(*s2), uc, uc) == doctest::Approx(stiff).epsilon(1e-13));
        const auto w = assemble_weighted_scalar_mass(*s2, {[](const Vec3& x) { return 1.0 + x[0]; }});
        const double wm = oracle::integrate_cube([&](const Vec3& x) { return (1 + x[0]) * p(x) * p(x); }, 2);
        CHECK(form<double>(w, uc, uc) == doctest::Approx(wm).epsilon(1e-13));
        const auto ones = std::vector<double>(s2->dof_count(), 1.0);
        CHECK(form<double>(assemble_scalar_mass(*s2), ones, ones) == doctest::Approx(1.0).epsilon(1e-14));
        const auto k1 = assemble_scalar_stiffness(*s2) * std::span<const double>(ones);
        for (double x : k1) CHECK(std::abs(x) < 1e-13);
    }
    SUBCASE("vector forms") {
        const auto a = c1.coefficients(), b = c2.coefficients();
        const double mass = oracle::integrate_cube([&](const Vec3& x) { return dot3(f1(x), f1(x)); }, 2);
        const double curl = oracle::integrate_cube(
            [&](const Vec3& x) { return x[1] * x[1] + (x[2] - 2 * x[1]) * (x[2] - 2 * x[1]); }, 2);
        const double div = oracle::integrate_cube([&](const Vec3& x) { return (3 * x[0] + x[2]) * (3 * x[0] + x[2]); }, 2);
        CHECK(form<double>(assemble_vector_mass(*v2), a, a) == doctest::Approx(mass).epsilon(1e-13));
        CHECK(form<double>(assemble_curl_curl(*v2), a, a) == doctest::Approx(curl).epsilon(1e-13));
        CHECK(std::abs(form<double>(assemble_div_div(*v2), a, a)) < 1e-13);
        CHECK(form<double>(assemble_div_div(*v2), b, b) == doctest::Approx(div).epsilon(1e-13));
        // curl f2 = (-y, -z, 0)
        const double curl2 = oracle::integrate_cube([&](const Vec3& x) { return x[1] * x[1] + x[2] * x[2]; }, 2);
        const auto d = assemble_maxwell_operator(*v2);
        CHECK(form<double>(d, b, b) == doctest::Approx(curl2 + div).epsilon(1e-13));
        const auto cc = assemble_curl_curl(*v2), dd = assemble_div_div(*v2);
        for (int r = 0; r < d.rows(); ++r)
            for (int c : {0, 5, d.rows() - 1}) CHECK(std::abs(d.coeff(r, c) - cc.coeff(r, c) - dd.coeff(r, c)) < 1e-13);
        // multiplier pairing (q, div v)
        const auto bp = assemble_div_pairing(*s1, *v2);
        CHECK(bp.rows() == s1->dof_count());
        CHECK(bp.cols() == v2->dof_count());
        const auto bq = bp * b;
        double pair = 0.0;
        for (int i = 0; i < s1->dof_count(); ++i) pair += qh.coefficients()[i] * bq[i];
        const double exact = oracle::integrate_cube([&](const Vec3& x) { return q(x) * (3 * x[0] + x[2]); }, 2);
        CHECK(pair == doctest::Approx(exact).epsilon(1e-13));
    }
    SUBCASE("weighted vector mass with density weight") {
        const auto pc = make(m, FieldKind::ScalarComplex, 1, BoundaryCondition::None);
        const auto psi = interpolate_scalar(pc, [](const Vec3& x) { return cplx(1.0 + x[0], x[1]); });
        const auto w = assemble_weighted_vector_mass(*v2, psi);
        const auto a = c1.coefficients();
        const double e = oracle::integrate_cube(
            [&](const Vec3& x) { return ((1 + x[0]) * (1 + x[0]) + x[1] * x[1]) * dot3(f1(x), f1(x)); }, 2);
        CHECK(form<double>(w, a, a) == doctest::Approx(e).epsilon(1e-13));
    }
    SUBCASE("magnetic form") {
        const auto pc = make(m, FieldKind::ScalarComplex, 2, BoundaryCondition::None);
        const auto psi_f = [](const Vec3& x) { return cplx(x[0] * x[0] + x[1] * x[2], x[0] - x[1] * x[2]); };
        const auto grad = [](const Vec3& x) {
            return std::array<cplx, 3>{cplx(2 * x[0], 1.0), cplx(x[2], -x[2]), cplx(x[1], -x[1])};
        };
        const auto a_f = [](const Vec3& x) { return Vec3{x[1], -x[0], 0.5}; };
        const auto psi = interpolate_scalar(pc, psi_f);
        const auto a = interpolate_vector(v2, a_f);
        const auto s = assemble_magnetic_schrodinger(*pc, a);
        const double e = oracle::integrate_cube(
            [&](const Vec3& x) {
                const auto g = grad(x);
                const Vec3 av = a_f(x);
                double sum = 0.0;
                for (int d = 0; d < 3; ++d) sum += std::norm(I * g[d] + av[d] * psi_f(x));
                return sum;
            },
            2);
        const cplx got = form<cplx>(s, psi.coefficients(), psi.coefficients());
        CHECK(got.real() == doctest::Approx(e).epsilon(1e-13));
        CHECK(std::abs(got.imag()) < 1e-12);
    }
}

TEST_CASE("magnetic form without a vector potential is the stiffness") {
    const auto m = mesh_of(2);
    for (int r : {1, 2}) {
        const auto pc = make(m, FieldKind::ScalarComplex, r, BoundaryCondition::Dirichlet);
        const auto v = make(m, FieldKind::Vector3, 2, BoundaryCondition::Tangential);
        const auto s = assemble_magnetic_schrodinger(*pc, RealFunction(v));
        const auto k = assemble_scalar_stiffness(*pc);
        CHECK(s.same_pattern(k));
        for (int i = 0; i < s.nnz(); ++i) CHECK(std::abs(s.values()[i] - k.values()[i]) < 1e-13);
    }
}

TEST_CASE("magnetic identity splits into stiffness, |A|^2 mass and current pairing") {
    std::mt19937_64 rng(31);
    const auto m = mesh_of(2);
    for (int r : {1, 2}) {
        const auto pc = make(m, FieldKind::ScalarComplex, r, BoundaryCondition::Dirichlet);
        const auto v = make(m, FieldKind::Vector3, 2, BoundaryCondition::Tangential);
        for (int trial = 0; trial < 10; ++trial) {
            ComplexFunction psi(pc, random_complex(rng, pc->dof_count())), phi(pc, random_complex(rng, pc->dof_count()));
            RealFunction a(v, random_real(rng, v->dof_count()));
            psi.apply_constraints();
            phi.apply_constraints();
            a.apply_constraints();
            const cplx lhs = form<cplx>(assemble_magnetic_schrodinger(*pc, a), phi.coefficients(), psi.coefficients());
            const cplx stiff = form_rc(assemble_scalar_stiffness(*pc), phi.coefficients(), psi.coefficients());
            ScalarWeight w;
            w.vector_norm_squared = &a;
            const cplx amass = form_rc(assemble_weighted_scalar_mass(*pc, w), phi.coefficients(), psi.coefficients());
            const cplx rhs = stiff + amass + 2.0 * current_pairing(psi, phi, a);
            CHECK(std::abs(lhs - rhs) <= 1e-11 * std::abs(lhs));
        }
    }
}

TEST_CASE("Hermitian and semidefinite assembled operators") {
    std::mt19937_64 rng(32);
    const auto m = mesh_of(2);
    const auto pc = make(m, FieldKind::ScalarComplex, 2, BoundaryCondition::Dirichlet);
    const auto v = make(m, FieldKind::Vector3, 2, BoundaryCondition::Tangential);
    RealFunction a(v, random_real(rng, v->dof_count()));
    ComplexFunction psi(pc, random_complex(rng, pc->dof_count()));
    const auto s = assemble_magnetic_schrodinger(*pc, a);
    CHECK(s.max_asymmetry(Structure::Hermitian) <= 1e-12 * s.max_abs());
    CHECK(s.structure() == Structure::Hermitian);
    const std::vector<RealMatrix> reals{assemble_curl_curl(*v), assemble_div_div(*v), assemble_vector_mass(*v),
                                        assemble_maxwell_operator(*v), assemble_weighted_vector_mass(*v, psi)};
    const auto sm = assemble_scalar_mass(*pc);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = random_complex(rng, pc->dof_count());
        double nx = 0.0;
        for (auto c : x) nx += std::norm(c);
        CHECK(form<cplx>(s, x, x).real() >= -1e-12 * nx);
        CHECK(form_rc(sm, x, x).real() > 0.0);
        const auto y = random_real(rng, v->dof_count());
        double ny = 0.0;
        for (double c : y) ny += c * c;
        for (const auto& r : reals) CHECK(form<double>(r, y, y) >= -1e-12 * ny);
    }
    for (const auto& r : reals) CHECK(r.max_asymmetry(Structure::Symmetric) <= 1e-12 * r.max_abs());
}

TEST_CASE("current load") {
    std::mt19937_64 rng(33);
    const auto m = mesh_of(2);
    const auto pc = make(m, FieldKind::ScalarComplex, 2, BoundaryCondition::Dirichlet);
    const auto v = make(m, FieldKind::Vector3, 2, BoundaryCondition::Tangential);
    const auto real_field = [](const Vec3& x) {
        return std::sin(pi * x[0]) * std::sin(2 * pi * x[1]) * x[2] * (1 - x[2]);
    };
    const auto psi_real = interpolate_scalar(pc, [&](const Vec3& x) { return cplx(real_field(x), 0.0); });
    const auto psi_phase = interpolate_scalar(pc, [&](const Vec3& x) { return std::exp(I * pi / 4.0) * real_field(x); });
    for (double c : assemble_current(psi_real, *v)) CHECK(std::abs(c) <= 1e-13);
    for (double c : assemble_current(psi_phase, *v)) CHECK(std::abs(c) <= 1e-13);

    ComplexFunction psi(pc, random_complex(rng, pc->dof_count()));
    psi.apply_constraints();
    RealFunction a(v, random_real(rng, v->dof_count()));
    const auto load = assemble_current(psi, *v);
    double pairing = 0.0;
    for (int i = 0; i < v->dof_count(); ++i) pairing += load[i] * a.coefficients()[i];
    const cplx cp = current_pairing(psi, psi, a);
    CHECK(std::abs(cp.imag()) <= 1e-12 * std::abs(cp));
    CHECK(std::abs(cp.real() - pairing) <= 1e-12 * std::abs(pairing));
}

TEST_CASE("current load of the manufactured wave function against a quadrature oracle") {
    const auto m = mesh_of(4);
    const auto set = SpaceSet::make(m, 2);
    const auto ms = convergence_example();
    // a wave function with nonzero current: the exact field times a position-dependent phase
    const auto psi = interpolate_scalar(set.psi, [&](const Vec3& x) { return ms.psi(x, 0.0) * std::exp(I * x[0]); });
    std::mt19937_64 rng(34);
    RealFunction w(set.vec, random_real(rng, set.vec->dof_count()));
    w.apply_constraints();
    const auto load = assemble_current(psi, *set.vec);
    double got = 0.0;
    for (int i = 0; i < set.vec->dof_count(); ++i) got += load[i] * w.coefficients()[i];
    // degree 5 integrand, exact for the 5-point collapsed rule
    const double expect = integrate_mesh(*m, [&](const Vec3& x) {
        const auto p = evaluate_scalar(psi, x);
        const auto vv = evaluate_vector(w, x);
        double s = 0.0;
        for (int d = 0; d < 3; ++d) s += -(std::conj(p.value) * p.grad[d]).imag() * vv.value[d];
        return s;
    });
    CHECK(std::abs(got - expect) <= 1e-11 * std::abs(expect));
}

TEST_CASE("density load integrates the charge") {
    std::mt19937_64 rng(35);
    const auto m = mesh_of(2);
    for (int r : {1, 2}) {
        const auto pc = make(m, FieldKind::ScalarComplex, r, BoundaryCondition::Dirichlet);
        const auto test = make(m, FieldKind::ScalarReal, 1, BoundaryCondition::None);
        ComplexFunction psi(pc, random_complex(rng, pc->dof_count()));
        psi.apply_constraints();
        const auto load = assemble_density_load(psi, *test);
        double total = 0.0;
        for (double x : load) total += x;
        const double charge = form_rc(assemble_scalar_mass(*pc), psi.coefficients(), psi.coefficients()).real();
        CHECK(total == doctest::Approx(charge).epsilon(1e-13));
    }
}

TEST_CASE("Maxwell load of an analytic field matches the assembled operator on its interpolant") {
    const auto m = mesh_of(2);
    const auto v = make(m, FieldKind::Vector3, 2, BoundaryCondition::None);
    const VectorFieldFn f{[](const Vec3& x) { return Vec3{x[0] * x[0], x[1] * x[2], x[0] * x[2]}; },
                          [](const Vec3& x) {
                              return Mat3{Vec3{2 * x[0], 0, 0}, Vec3{0, x[2], x[1]}, Vec3{x[2], 0, x[0]}};
                          }};
    const auto fh = interpolate_vector(v, f.value);
    const auto load = assemble_maxwell_load(*v, f);
    const auto dv = assemble_maxwell_operator(*v) * fh.coefficients();
    for (std::size_t i = 0; i < load.size(); ++i) CHECK(std::abs(load[i] - dv[i]) < 1e-13);
}

TEST_CASE("Maxwell energy of the divergence-free part converges") {
    // D(a, a) for a = (cos sin sin, sin cos sin, -2 sin sin cos)(pi x): curl a has L2 norm^2 9 pi^2 / 4
    const auto ms = convergence_example();
    const double exact = 9.0 * pi * pi / 4.0;
    std::vector<double> err;
    for (int n : {2, 4, 8}) {
        const auto v = make(mesh_of(n), FieldKind::Vector3, 2, BoundaryCondition::Tangential);
        const auto a = interpolate_vector(v, ms.a_at(0.5).value);
        err.push_back(std::abs(form<double>(assemble_maxwell_operator(*v), a.coefficients(), a.coefficients()) - exact));
    }
    CHECK(err[2] < err[1]);
    CHECK(std::log2(err[1] / err[2]) >= 1.7);
}

TEST_CASE("manufactured loads") {
    const auto m = mesh_of(2);
    const auto set = SpaceSet::make(m, 2);
    const ManufacturedSolution zero({}, {}, {}, {});
    const auto z = assemble_manufactured_loads(zero, 0.5, 0.25, 1.0, set);
    CHECK(z.g.size() == static_cast<std::size_t>(set.psi->dof_count()));
    CHECK(z.f.size() == static_cast<std::size_t>(set.vec->dof_count()));
    CHECK(z.h.size() == static_cast<std::size_t>(set.phi->dof_count()));
    for (auto c : z.g) CHECK(c == cplx{});
    for (auto c : z.f) CHECK(c == 0.0);
    for (auto c : z.h) CHECK(c == 0.0);

    // each load is taken at its own time
    const auto ms = convergence_example();
    const auto l = assemble_manufactured_loads(ms, 0.5, 0.25, 1.0, set);
    const auto g = assemble_load(*set.psi, [&](const Vec3& x) { return ms.forcing_g(x, 0.5); });
    const auto h = assemble_load(*set.phi, [&](const Vec3& x) { return ms.forcing_h(x, 1.0); });
    const auto f = assemble_vector_load(*set.vec, [&](const Vec3& x) { return ms.forcing_f(x, 0.25); });
    CHECK(l.g == g);
    CHECK(l.h == h);
    CHECK(l.f == f);
}

TEST_CASE("g load pairs with the interpolated wave function like a dense quadrature") {
    // The degree-6 rule integrates a smooth non-polynomial integrand; the gap
    // to the dense oracle shrinks at high order as the mesh is refined.
    const auto ms = convergence_example();
    std::vector<double> gap;
    for (int n : {2, 4}) {
        const auto m = mesh_of(n);
        const auto set = SpaceSet::make(m, 2);
        const auto psi = interpolate_scalar(set.psi, ms.psi_at(0.0).value);
        const auto load = assemble_manufactured_loads(ms, 0.0, 0.0, 0.0, set).g;
        cplx got{};
        for (int i = 0; i < set.psi->dof_count(); ++i) got += std::conj(psi.coefficients()[i]) * load[i];
        const auto part = [&](bool imag) {
            return integrate_mesh(*m, [&](const Vec3& x) {
                const cplx v = ms.forcing_g(x, 0.0) * std::conj(evaluate_scalar(psi, x).value);
                return imag ? v.imag() : v.real();
            }, 10);
        };
        const cplx expect(part(false), part(true));
        gap.push_back(std::abs(got - expect) / std::abs(expect));
    }
    CHECK(gap[1] < 1e-3);
    CHECK(gap[1] < gap[0] / 16.0);
}
