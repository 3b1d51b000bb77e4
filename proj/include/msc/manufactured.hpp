#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "msc/mesh.hpp"

namespace msc {

using cplx = std::complex<double>;
using Mat3 = std::array<Vec3, 3>;

/// One-dimensional factor: sin(k*pi*x), cos(k*pi*x) or a quadratic polynomial.
class Factor {
public:
    static Factor sine(double k) { return {Kind::Sin, k, {}}; }
    static Factor cosine(double k) { return {Kind::Cos, k, {}}; }
    static Factor poly(double c0, double c1, double c2) { return {Kind::Poly, 0.0, {c0, c1, c2}}; }
    static Factor one() { return poly(1.0, 0.0, 0.0); }

    /// d^order/dx^order at x, order in 0..2.
    double eval(double x, int order) const noexcept;

private:
    enum class Kind { Sin, Cos, Poly };
    Factor(Kind kind, double k, std::array<double, 3> c) : kind_(kind), k_(k), c_(c) {}
    Kind kind_;
    double k_;
    std::array<double, 3> c_;
};

/// Value, gradient and Hessian of a scalar field at one point.
template <class T>
struct Jet {
    T value{};
    std::array<T, 3> grad{};
    std::array<std::array<T, 3>, 3> hess{};

    T laplacian() const { return hess[0][0] + hess[1][1] + hess[2][2]; }
};

/// coef * f0(x) * f1(y) * f2(z)
struct SeparableTerm {
    double coef = 1.0;
    std::array<Factor, 3> factors{Factor::one(), Factor::one(), Factor::one()};
};

/// Sum of separable terms.
class SeparableField {
public:
    SeparableField() = default;
    SeparableField(std::initializer_list<SeparableTerm> terms) : terms_(terms) {}

    SeparableField& add(SeparableTerm term) {
        terms_.push_back(term);
        return *this;
    }
    Jet<double> eval(const Vec3& x) const noexcept;
    double value(const Vec3& x) const noexcept { return eval(x).value; }

private:
    std::vector<SeparableTerm> terms_;
};

/// 1, sin(w t), cos(w t) or exp(i w t).
class TimeFactor {
public:
    static TimeFactor constant() { return {Kind::One, 0.0}; }
    static TimeFactor sine(double w) { return {Kind::Sin, w}; }
    static TimeFactor cosine(double w) { return {Kind::Cos, w}; }
    static TimeFactor phase(double w) { return {Kind::Phase, w}; }

    cplx eval(double t, int order) const noexcept;

private:
    enum class Kind { One, Sin, Cos, Phase };
    TimeFactor(Kind kind, double w) : kind_(kind), w_(w) {}
    Kind kind_;
    double w_;
};

/// sum_j T_j(t) X_j(x)
class SpaceTimeField {
public:
    SpaceTimeField& add(TimeFactor time, SeparableField space) {
        modes_.push_back({time, std::move(space)});
        return *this;
    }
    /// Spatial jet of the `time_order`-th time derivative.
    Jet<cplx> eval(const Vec3& x, double t, int time_order = 0) const;

private:
    struct Mode {
        TimeFactor time;
        SeparableField space;
    };
    std::vector<Mode> modes_;
};

/// Pointwise evaluators with derivatives, as consumed by interpolation,
/// projection and error norms.
struct ScalarFieldFn {
    std::function<double(const Vec3&)> value;
    std::function<Vec3(const Vec3&)> gradient;
};
struct ComplexFieldFn {
    std::function<cplx(const Vec3&)> value;
    std::function<std::array<cplx, 3>(const Vec3&)> gradient;
};
struct VectorFieldFn {
    std::function<Vec3(const Vec3&)> value;
    std::function<Mat3(const Vec3&)> jacobian;  // jacobian[i][j] = d value_i / d x_j
};

/// Exact fields of the coupled system and the forcings obtained by inserting
/// them into
///   -i Psi_t + 1/2 (i grad + A)^2 Psi + V Psi + phi Psi = g
///   A_tt + curl curl A + grad phi_t + (i/2)(Psi* grad Psi - Psi grad Psi*) + |Psi|^2 A = f
///   -lap phi - |Psi|^2 = h
class ManufacturedSolution {
public:
    ManufacturedSolution(SpaceTimeField psi, std::array<SpaceTimeField, 3> a, SpaceTimeField phi,
                         SeparableField potential);

    cplx psi(const Vec3& x, double t) const { return psi_.eval(x, t).value; }
    std::array<cplx, 3> grad_psi(const Vec3& x, double t) const { return psi_.eval(x, t).grad; }
    cplx dpsi_dt(const Vec3& x, double t) const { return psi_.eval(x, t, 1).value; }
    cplx laplacian_psi(const Vec3& x, double t) const { return psi_.eval(x, t).laplacian(); }

    Vec3 vector_potential(const Vec3& x, double t, int time_order = 0) const;
    Mat3 jacobian_a(const Vec3& x, double t, int time_order = 0) const;
    double div_a(const Vec3& x, double t) const;
    Vec3 curl_a(const Vec3& x, double t) const;
    Vec3 laplacian_a(const Vec3& x, double t) const;
    Vec3 grad_div_a(const Vec3& x, double t) const;

    double phi(const Vec3& x, double t, int time_order = 0) const { return real_jet(phi_, x, t, time_order).value; }
    Vec3 grad_phi(const Vec3& x, double t, int time_order = 0) const { return real_jet(phi_, x, t, time_order).grad; }
    double laplacian_phi(const Vec3& x, double t) const { return real_jet(phi_, x, t, 0).laplacian(); }

    double potential(const Vec3& x) const { return potential_.value(x); }

    cplx forcing_g(const Vec3& x, double t) const;
    Vec3 forcing_f(const Vec3& x, double t) const;
    double forcing_h(const Vec3& x, double t) const;

    // Snapshots at a fixed time.
    ComplexFieldFn psi_at(double t) const;
    VectorFieldFn a_at(double t, int time_order = 0) const;
    ScalarFieldFn phi_at(double t) const;
    std::function<double(const Vec3&)> potential_fn() const;

private:
    static Jet<double> real_jet(const SpaceTimeField& f, const Vec3& x, double t, int order);

    SpaceTimeField psi_;
    std::array<SpaceTimeField, 3> a_;
    SpaceTimeField phi_;
    SeparableField potential_;
};

/// Free-evolution data: two-mode sine wave function with unit charge, a
/// stream-function-like vector potential at rest, V = 5. The fields are time
/// independent, so snapshots at t = 0 give (Psi_0, A_0) and the first time
/// derivative of A gives A_1 = 0.
///
/// `div_fix` negates the third component of A_0, which makes it divergence
/// free; without it the printed literal form is used.
ManufacturedSolution conservation_example(bool div_fix = true);

/// Manufactured solution used for the convergence study:
///   Psi = 5 e^{i pi t} sin(2 pi x) sin(2 pi y) sin(2 pi z),
///   A   = sin(pi t) a(x) + cos(pi t) b(x),
///   phi = 4 sin(pi t) x(1-x) y(1-y) z(1-z) + cos(pi t) sin(pi x) sin(pi y) sin(pi z),
///   V   = |x|^2 / 2.
/// `div_fix` negates the third component of b as above.
ManufacturedSolution convergence_example(bool div_fix = true);

}  // namespace msc
