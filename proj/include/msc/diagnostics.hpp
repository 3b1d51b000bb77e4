#pragma once

#include <optional>
#include <span>
#include <vector>

#include "msc/assembly.hpp"
#include "msc/fespace.hpp"
#include "msc/manufactured.hpp"

namespace msc {

/// One row of a conservation trace.
struct DiagnosticsRecord {
    int step = 0;
    double time = 0.0;
    double charge = 0.0;
    double energy = 0.0;
    double div_residual = 0.0;
    int picard_iterations = 0;
};

/// Final-time H1 errors of one mesh of a convergence sweep.
struct ErrorRecord {
    int n = 0;
    double h = 0.0;
    double tau = 0.0;
    double err_psi = 0.0;
    double err_a = 0.0;
    double err_phi = 0.0;
};

/// ||psi||^2 in L2, i.e. psi^H M psi.
double total_charge(const ComplexFunction& psi);
double total_charge(const ComplexFunction& psi, const RealMatrix& mass);

/// Terms of the discrete energy
///   1/2 B(Abar; psi, psi) + (V psi, psi) + 1/2 |grad phi|^2
///   + 1/2 |(A - A_prev) / tau|^2 + 1/4 D(A, A) + 1/4 D(A_prev, A_prev)
/// with Abar = (A + A_prev) / 2.
struct EnergyTerms {
    double magnetic = 0.0;
    double potential = 0.0;
    double electric = 0.0;
    double field_kinetic = 0.0;
    double field_static = 0.0;
    /// Largest imaginary part discarded from the two Schrodinger terms,
    /// relative to their magnitude.
    double imaginary_residue = 0.0;

    double total() const noexcept { return magnetic + potential + electric + field_kinetic + field_static; }
};

/// Caches the state-independent matrices of the energy for one set of spaces.
class EnergyEvaluator {
public:
    EnergyEvaluator(const SpaceSet& spaces, const std::function<double(const Vec3&)>& potential);

    /// `magnetic` may carry the already assembled B(Abar; ., .) matrix.
    EnergyTerms evaluate(const ComplexFunction& psi, const RealFunction& a, const RealFunction& a_prev,
                         const RealFunction& phi, double tau, const ComplexMatrix* magnetic = nullptr) const;

    const RealMatrix& psi_mass() const noexcept { return psi_mass_; }
    const RealMatrix& potential_mass() const noexcept { return potential_mass_; }
    const RealMatrix& phi_stiffness() const noexcept { return phi_stiffness_; }
    const RealMatrix& vector_mass() const noexcept { return vector_mass_; }
    const RealMatrix& maxwell_operator() const noexcept { return maxwell_; }

private:
    SpaceSet spaces_;
    RealMatrix psi_mass_, potential_mass_, phi_stiffness_, vector_mass_, maxwell_;
};

EnergyTerms discrete_energy(const SpaceSet& spaces, const std::function<double(const Vec3&)>& potential,
                            const ComplexFunction& psi, const RealFunction& a, const RealFunction& a_prev,
                            const RealFunction& phi, double tau);

/// sqrt(|u_h - u|_L2^2 + |grad u_h - grad u|_L2^2), element quadrature of degree 6.
double h1_error(const RealFunction& uh, const ScalarFieldFn& exact);
double h1_error(const ComplexFunction& uh, const ComplexFieldFn& exact);
double h1_error(const RealFunction& uh, const VectorFieldFn& exact);
double l2_error(const RealFunction& uh, const std::function<double(const Vec3&)>& exact);
double l2_error(const ComplexFunction& uh, const std::function<cplx(const Vec3&)>& exact);

/// log2(coarse / fine); empty when either error is zero or non-finite.
std::optional<double> convergence_order(double coarse, double fine);
/// Least-squares slope of log(err) against log(h); empty with fewer than
/// two usable points.
std::optional<double> least_squares_slope(std::span<const double> h, std::span<const double> err);

/// max_j |(div A, q_j)| / ||q_j||_L2 over the free multiplier basis.
double divergence_residual(const RealFunction& a, const FeSpace& multiplier);
/// Same with a precomputed reduced pairing and the reduced multiplier mass diagonal.
double divergence_residual(const RealFunction& a, const RealMatrix& pairing, std::span<const double> mass_diagonal);

/// Smallest generalized singular value of the divergence pairing between the
/// constrained P2 vector space (H1 norm) and the P1 multiplier space (L2 norm):
///   beta^2 = lambda_min(B K^{-1} B^T, M_p),  K = D + vector mass.
double inf_sup_constant(int n);

}  // namespace msc
