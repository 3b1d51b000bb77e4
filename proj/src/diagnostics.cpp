#include "msc/diagnostics.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace msc {

namespace {

cplx hermitian_form(const RealMatrix& m, std::span<const cplx> x) {
    const auto mx = multiply(m, x);
    return kernels::dotc(x, mx);
}

double real_form(const RealMatrix& m, std::span<const double> x) {
    const auto mx = m * x;
    return kernels::dot(x, mx);
}

}  // namespace

double total_charge(const ComplexFunction& psi, const RealMatrix& mass) {
    return hermitian_form(mass, psi.coefficients()).real();
}

double total_charge(const ComplexFunction& psi) { return total_charge(psi, assemble_scalar_mass(psi.space())); }

EnergyEvaluator::EnergyEvaluator(const SpaceSet& spaces, const std::function<double(const Vec3&)>& potential)
    : spaces_(spaces),
      psi_mass_(assemble_scalar_mass(*spaces.psi)),
      potential_mass_(assemble_weighted_scalar_mass(*spaces.psi, {potential})),
      phi_stiffness_(assemble_scalar_stiffness(*spaces.phi)),
      vector_mass_(assemble_vector_mass(*spaces.vec)),
      maxwell_(assemble_maxwell_operator(*spaces.vec)) {}

EnergyTerms EnergyEvaluator::evaluate(const ComplexFunction& psi, const RealFunction& a, const RealFunction& a_prev,
                                      const RealFunction& phi, double tau, const ComplexMatrix* magnetic) const {
    if (!(tau > 0.0)) throw InvalidArgument("energy needs a positive time step");
    const auto nv = a.coefficients().size();
    if (a_prev.coefficients().size() != nv) throw ShapeError("vector potentials on different spaces");
    EnergyTerms e;
    cplx b{};
    if (magnetic) {
        const auto sx = *magnetic * psi.coefficients();
        b = kernels::dotc(psi.coefficients(), std::span<const cplx>(sx));
    } else {
        std::vector<double> mid(nv);
        for (std::size_t i = 0; i < nv; ++i) mid[i] = 0.5 * (a.coefficients()[i] + a_prev.coefficients()[i]);
        const auto s = assemble_magnetic_schrodinger(psi.space(), RealFunction(a.space_ptr(), std::move(mid)));
        const auto sx = s * psi.coefficients();
        b = kernels::dotc(psi.coefficients(), std::span<const cplx>(sx));
    }
    const cplx v = hermitian_form(potential_mass_, psi.coefficients());
    e.magnetic = 0.5 * b.real();
    e.potential = v.real();
    const double scale = std::abs(b) + std::abs(v);
    e.imaginary_residue = scale > 0.0 ? std::max(std::abs(b.imag()), std::abs(v.imag())) / scale : 0.0;
    e.electric = 0.5 * real_form(phi_stiffness_, phi.coefficients());
    std::vector<double> rate(nv);
    for (std::size_t i = 0; i < nv; ++i) rate[i] = (a.coefficients()[i] - a_prev.coefficients()[i]) / tau;
    e.field_kinetic = 0.5 * real_form(vector_mass_, rate);
    e.field_static = 0.25 * real_form(maxwell_, a.coefficients()) + 0.25 * real_form(maxwell_, a_prev.coefficients());
    return e;
}

EnergyTerms discrete_energy(const SpaceSet& spaces, const std::function<double(const Vec3&)>& potential,
                            const ComplexFunction& psi, const RealFunction& a, const RealFunction& a_prev,
                            const RealFunction& phi, double tau) {
    return EnergyEvaluator(spaces, potential).evaluate(psi, a, a_prev, phi, tau);
}

namespace {

// Sum over elements of sum_q w_q * local(q, samples...).
template <class Sample, class Sampler, class Local>
double integrate_error(const FeSpace& space, Sampler sampler, Local local) {
    const Mesh& mesh = space.mesh();
    ElementTabulation tab(space.element(), keast_degree6());
    std::vector<Sample> s;
    double total = 0.0;
    for (int t = 0; t < mesh.tet_count(); ++t) {
        tab.bind(TetGeometry::of(mesh, t));
        sampler(t, tab, s);
        for (int q = 0; q < tab.points(); ++q) total += tab.weight(q) * local(tab.point(q), s[q]);
    }
    return total;
}

}  // namespace

double h1_error(const RealFunction& uh, const ScalarFieldFn& exact) {
    const double s = integrate_error<ScalarSample<double>>(
        uh.space(), [&](int t, const ElementTabulation& tab, auto& out) { sample_scalar(uh, t, tab, out); },
        [&](const Vec3& x, const ScalarSample<double>& v) {
            const double d = v.value - exact.value(x);
            const Vec3 g = exact.gradient(x);
            double e = d * d;
            for (int k = 0; k < 3; ++k) e += (v.grad[k] - g[k]) * (v.grad[k] - g[k]);
            return e;
        });
    return std::sqrt(s);
}

double h1_error(const ComplexFunction& uh, const ComplexFieldFn& exact) {
    const double s = integrate_error<ScalarSample<cplx>>(
        uh.space(), [&](int t, const ElementTabulation& tab, auto& out) { sample_scalar(uh, t, tab, out); },
        [&](const Vec3& x, const ScalarSample<cplx>& v) {
            double e = std::norm(v.value - exact.value(x));
            const auto g = exact.gradient(x);
            for (int k = 0; k < 3; ++k) e += std::norm(v.grad[k] - g[k]);
            return e;
        });
    return std::sqrt(s);
}

double h1_error(const RealFunction& uh, const VectorFieldFn& exact) {
    const double s = integrate_error<VectorSample>(
        uh.space(), [&](int t, const ElementTabulation& tab, auto& out) { sample_vector(uh, t, tab, out); },
        [&](const Vec3& x, const VectorSample& v) {
            const Vec3 u = exact.value(x);
            const Mat3 j = exact.jacobian(x);
            double e = 0.0;
            for (int i = 0; i < 3; ++i) {
                e += (v.value[i] - u[i]) * (v.value[i] - u[i]);
                for (int k = 0; k < 3; ++k) e += (v.jacobian[i][k] - j[i][k]) * (v.jacobian[i][k] - j[i][k]);
            }
            return e;
        });
    return std::sqrt(s);
}

double l2_error(const RealFunction& uh, const std::function<double(const Vec3&)>& exact) {
    const double s = integrate_error<ScalarSample<double>>(
        uh.space(), [&](int t, const ElementTabulation& tab, auto& out) { sample_scalar(uh, t, tab, out); },
        [&](const Vec3& x, const ScalarSample<double>& v) {
            const double d = v.value - exact(x);
            return d * d;
        });
    return std::sqrt(s);
}

double l2_error(const ComplexFunction& uh, const std::function<cplx(const Vec3&)>& exact) {
    const double s = integrate_error<ScalarSample<cplx>>(
        uh.space(), [&](int t, const ElementTabulation& tab, auto& out) { sample_scalar(uh, t, tab, out); },
        [&](const Vec3& x, const ScalarSample<cplx>& v) { return std::norm(v.value - exact(x)); });
    return std::sqrt(s);
}

std::optional<double> convergence_order(double coarse, double fine) {
    if (!(coarse > 0.0) || !(fine > 0.0) || !std::isfinite(coarse) || !std::isfinite(fine)) return std::nullopt;
    return std::log2(coarse / fine);
}

std::optional<double> least_squares_slope(std::span<const double> h, std::span<const double> err) {
    if (h.size() != err.size()) throw ShapeError("slope needs matching sequences");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i] > 0.0 && err[i] > 0.0 && std::isfinite(err[i])) {
            lx.push_back(std::log(h[i]));
            ly.push_back(std::log(err[i]));
        }
    if (lx.size() < 2) return std::nullopt;
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i] / n;
        my += ly[i] / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

double divergence_residual(const RealFunction& a, const RealMatrix& pairing, std::span<const double> mass_diagonal) {
    const auto free = a.space().restrict_to_free<double>(a.coefficients());
    const auto ba = pairing * free;
    if (mass_diagonal.size() != ba.size()) throw ShapeError("multiplier mass does not match the pairing");
    double worst = 0.0;
    for (std::size_t j = 0; j < ba.size(); ++j) worst = std::max(worst, std::abs(ba[j]) / std::sqrt(mass_diagonal[j]));
    return worst;
}

double divergence_residual(const RealFunction& a, const FeSpace& multiplier) {
    const RealMatrix b = reduce(assemble_div_pairing(multiplier, a.space()), multiplier, a.space());
    const RealMatrix mp = reduce(assemble_scalar_mass(multiplier), multiplier, multiplier);
    std::vector<double> diag(mp.rows());
    for (int j = 0; j < mp.rows(); ++j) diag[j] = mp.coeff(j, j);
    return divergence_residual(a, b, diag);
}

double inf_sup_constant(int n) {
    if (n < 2) throw InvalidArgument("inf-sup probe needs N >= 2 (no interior multiplier dof at N = 1)");
    const auto mesh = std::make_shared<const Mesh>(n);
    const SpaceSet s = SpaceSet::make(mesh, 1);
    RealMatrix k = assemble_maxwell_operator(*s.vec);
    const RealMatrix mv = assemble_vector_mass(*s.vec);
    for (int i = 0; i < k.nnz(); ++i) k.values()[i] += mv.values()[i];
    const RealMatrix kr = reduce(k, *s.vec, *s.vec);
    const RealMatrix b = reduce(assemble_div_pairing(*s.multiplier, *s.vec), *s.multiplier, *s.vec);
    const RealMatrix mp = reduce(assemble_scalar_mass(*s.multiplier), *s.multiplier, *s.multiplier);
    const int m = b.rows();
    const RealMatrix bt = b.transpose();
    SpdSolver solver(kr);
    Eigen::MatrixXd schur(m, m), mass(m, m);
    std::vector<double> e(m, 0.0), col(bt.rows());
    for (int j = 0; j < m; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        bt.multiply(e, col);
        const auto x = solver.solve(col).x;
        const auto bx = b * x;
        for (int i = 0; i < m; ++i) {
            schur(i, j) = bx[i];
            mass(i, j) = mp.coeff(i, j);
        }
    }
    schur = 0.5 * (schur + schur.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(schur, mass);
    if (eig.info() != Eigen::Success) throw SolverBreakdown("generalized eigenproblem failed", {0, 0.0, true, "dense"});
    return std::sqrt(std::max(0.0, eig.eigenvalues().minCoeff()));
}

}  // namespace msc
