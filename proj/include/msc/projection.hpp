#pragma once

#include <memory>
#include <vector>

#include "msc/assembly.hpp"
#include "msc/fespace.hpp"
#include "msc/manufactured.hpp"
#include "msc/sparse.hpp"

namespace msc {

/// Ritz projection onto the discretely divergence-free vector fields:
/// find A_h with tangential constraints and a P1 multiplier p_h such that
///   D(A_h, v) + (p_h, div v) = D(A, v)   for all v
///   (div A_h, q)             = 0         for all q.
/// D is factorized once; every projection reuses it.
class RitzProjector {
public:
    RitzProjector(SpacePtr vec, SpacePtr multiplier, SolverOptions options = {});

    RealFunction project(const VectorFieldFn& field) const;
    RealFunction project(const RealFunction& field) const;

    const SpacePtr& vector_space() const noexcept { return vec_; }
    const SpacePtr& multiplier_space() const noexcept { return multiplier_; }
    /// Full (unreduced) D matrix and reduced divergence pairing.
    const RealMatrix& operator_matrix() const noexcept { return d_full_; }
    const RealMatrix& pairing() const noexcept { return b_; }
    const SolverReport& last_report() const noexcept { return report_; }

private:
    RealFunction solve(std::vector<double> load) const;

    SpacePtr vec_, multiplier_;
    RealMatrix d_full_;
    RealMatrix b_;
    SaddleSolver solver_;
    mutable SolverReport report_;
};

}  // namespace msc
