#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string_view>
#include <type_traits>
#include <vector>

#include "msc/fespace.hpp"
#include "msc/manufactured.hpp"
#include "msc/sparse.hpp"

namespace msc {

/// Every form the scheme assembles. Matrices have the test function on the
/// row and the trial function on the column.
enum class FormKind {
    ScalarMass,           // (u, v)
    ScalarStiffness,      // (grad u, grad v)
    VectorMass,           // (u, v), vector
    CurlCurl,             // (curl u, curl v)
    DivDiv,               // (div u, div v)
    DivPairing,           // (q, div v), q in the P1 multiplier space
    WeightedScalarMass,   // (w u, v)
    WeightedVectorMass,   // (|Psi|^2 u, v)
    MagneticSchrodinger,  // ((i grad + A) u, (i grad + A) v)
    CurrentLoad,          // (f(Psi, Psi), v)
    DensityLoad,          // (|Psi|^2, v)
    GenericLoad,          // (g, v) for a pointwise g
};

std::string_view form_name(FormKind kind);

/// Total polynomial degree of the integrand on one element when the scalar
/// fields have order `order` and the vector potential is quadratic.
/// `weight_degree` is the degree of the weight of WeightedScalarMass.
/// Returns -1 when the integrand is not polynomial (GenericLoad).
int integrand_degree(FormKind kind, int order, int weight_degree = 0);
/// True when the integrand degree exceeds the exactness of the quadrature.
bool is_under_integrated(FormKind kind, int order, int weight_degree = 0);

RealMatrix assemble_scalar_mass(const FeSpace& space);
RealMatrix assemble_scalar_stiffness(const FeSpace& space);
RealMatrix assemble_vector_mass(const FeSpace& space);
RealMatrix assemble_curl_curl(const FeSpace& space);
RealMatrix assemble_div_div(const FeSpace& space);
/// D(u, v) = (curl u, curl v) + (div u, div v) in one pass.
RealMatrix assemble_maxwell_operator(const FeSpace& space);
/// Rows: multiplier dofs, columns: vector dofs.
RealMatrix assemble_div_pairing(const FeSpace& multiplier, const FeSpace& vec);

/// Pointwise weight: analytic part plus an optional scalar field plus an
/// optional |A|^2 from a vector field. Absent parts contribute nothing.
struct ScalarWeight {
    std::function<double(const Vec3&)> analytic;
    const RealFunction* field = nullptr;
    const RealFunction* vector_norm_squared = nullptr;
};
RealMatrix assemble_weighted_scalar_mass(const FeSpace& space, const ScalarWeight& weight);
/// (|psi|^2 u, v) on a vector space.
RealMatrix assemble_weighted_vector_mass(const FeSpace& vec, const ComplexFunction& psi);
/// Hermitian matrix of the magnetic form B(A; u, v) on a complex scalar space.
ComplexMatrix assemble_magnetic_schrodinger(const FeSpace& space, const RealFunction& a);

/// Entry e = (f(psi, psi), v_e) with f(psi, phi) = (i/2)(phi* grad psi - psi grad phi*);
/// for psi = phi this is -Im(psi* grad psi), a real field.
std::vector<double> assemble_current(const ComplexFunction& psi, const FeSpace& vec);
/// (f(psi, phi), A), complex in general.
cplx current_pairing(const ComplexFunction& psi, const ComplexFunction& phi, const RealFunction& a);
/// Entry e = (|psi|^2, v_e) on a real scalar space.
std::vector<double> assemble_density_load(const ComplexFunction& psi, const FeSpace& test);

std::vector<double> assemble_load(const FeSpace& space, const std::function<double(const Vec3&)>& f);
std::vector<cplx> assemble_load(const FeSpace& space, const std::function<cplx(const Vec3&)>& f);
template <class F>
    requires(!std::is_same_v<std::decay_t<F>, std::function<double(const Vec3&)>> &&
             !std::is_same_v<std::decay_t<F>, std::function<cplx(const Vec3&)>> &&
             std::is_invocable_v<const F&, const Vec3&>)
auto assemble_load(const FeSpace& space, const F& f) {
    using R = std::invoke_result_t<const F&, const Vec3&>;
    if constexpr (std::is_convertible_v<R, double>)
        return assemble_load(space, std::function<double(const Vec3&)>(f));
    else
        return assemble_load(space, std::function<cplx(const Vec3&)>(f));
}
std::vector<double> assemble_vector_load(const FeSpace& vec, const std::function<Vec3(const Vec3&)>& f);

/// (curl F, curl v) + (div F, div v) for an analytic field with Jacobian.
std::vector<double> assemble_maxwell_load(const FeSpace& vec, const VectorFieldFn& field);

struct ManufacturedLoads {
    std::vector<cplx> g;    // on the Psi space, at t_g
    std::vector<double> f;  // on the vector space, at t_f
    std::vector<double> h;  // on the phi space, at t_h
};
ManufacturedLoads assemble_manufactured_loads(const ManufacturedSolution& ms, double t_g, double t_f, double t_h,
                                              const SpaceSet& spaces);

/// Drops constrained rows and columns. All constraints are homogeneous, so
/// elimination leaves the right-hand side unchanged.
template <class T>
CsrMatrix<T> reduce(const CsrMatrix<T>& m, const FeSpace& test, const FeSpace& trial) {
    return m.submatrix(test.reduced_index(), test.free_count(), trial.reduced_index(), trial.free_count());
}

}  // namespace msc
