#include "msc/projection.hpp"

namespace msc {

RitzProjector::RitzProjector(SpacePtr vec, SpacePtr multiplier, SolverOptions options)
    : vec_(std::move(vec)), multiplier_(std::move(multiplier)), solver_(options) {
    if (!vec_ || !multiplier_) throw InvalidArgument("projection needs both spaces");
    if (vec_->kind() != FieldKind::Vector3) throw ShapeError("projection target must be a vector space");
    if (&vec_->mesh() != &multiplier_->mesh()) throw ShapeError("spaces live on different meshes");
    d_full_ = assemble_maxwell_operator(*vec_);
    b_ = reduce(assemble_div_pairing(*multiplier_, *vec_), *multiplier_, *vec_);
    solver_.factorize(reduce(d_full_, *vec_, *vec_), b_);
}

RealFunction RitzProjector::project(const VectorFieldFn& field) const {
    return solve(assemble_maxwell_load(*vec_, field));
}

RealFunction RitzProjector::project(const RealFunction& field) const {
    if (field.space_ptr() != vec_ && !(field.space().kind() == FieldKind::Vector3 &&
                                        &field.space().mesh() == &vec_->mesh() && field.space().order() == vec_->order()))
        throw ShapeError("field does not live on the projection space");
    return solve(d_full_ * field.coefficients());
}

RealFunction RitzProjector::solve(std::vector<double> load) const {
    const auto f = vec_->restrict_to_free<double>(load);
    const std::vector<double> g(b_.rows(), 0.0);
    SaddleSolution sol = solver_.solve(f, g);
    report_ = sol.report;
    return RealFunction(vec_, vec_->extend_from_free<double>(sol.primal));
}

}  // namespace msc
