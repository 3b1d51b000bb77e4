#include "msc/manufactured.hpp"

#include <cmath>
#include <numbers>

namespace msc {

namespace {
constexpr double kPi = std::numbers::pi;
}

double Factor::eval(double x, int order) const noexcept {
    switch (kind_) {
        case Kind::Sin: {
            const double w = k_ * kPi;
            if (order == 0) return std::sin(w * x);
            if (order == 1) return w * std::cos(w * x);
            return -w * w * std::sin(w * x);
        }
        case Kind::Cos: {
            const double w = k_ * kPi;
            if (order == 0) return std::cos(w * x);
            if (order == 1) return -w * std::sin(w * x);
            return -w * w * std::cos(w * x);
        }
        case Kind::Poly:
            if (order == 0) return c_[0] + x * (c_[1] + x * c_[2]);
            if (order == 1) return c_[1] + 2.0 * c_[2] * x;
            return 2.0 * c_[2];
    }
    return 0.0;
}

Jet<double> SeparableField::eval(const Vec3& x) const noexcept {
    Jet<double> jet;
    for (const auto& term : terms_) {
        std::array<std::array<double, 3>, 3> f{};  // f[d][order]
        for (int d = 0; d < 3; ++d)
            for (int o = 0; o < 3; ++o) f[d][o] = term.factors[d].eval(x[d], o);
        jet.value += term.coef * f[0][0] * f[1][0] * f[2][0];
        for (int i = 0; i < 3; ++i) {
            double g = term.coef;
            for (int d = 0; d < 3; ++d) g *= f[d][d == i ? 1 : 0];
            jet.grad[i] += g;
            for (int j = 0; j < 3; ++j) {
                double h = term.coef;
                for (int d = 0; d < 3; ++d) h *= f[d][(d == i) + (d == j)];
                jet.hess[i][j] += h;
            }
        }
    }
    return jet;
}

cplx TimeFactor::eval(double t, int order) const noexcept {
    switch (kind_) {
        case Kind::One:
            return order == 0 ? 1.0 : 0.0;
        case Kind::Sin:
        case Kind::Cos: {
            // derivatives cycle with a quarter-period phase shift
            const double shift = (kind_ == Kind::Cos ? 0.5 * kPi : 0.0) + 0.5 * kPi * order;
            return std::pow(w_, order) * std::sin(w_ * t + shift);
        }
        case Kind::Phase:
            return std::pow(cplx(0.0, w_), order) * std::exp(cplx(0.0, w_ * t));
    }
    return 0.0;
}

Jet<cplx> SpaceTimeField::eval(const Vec3& x, double t, int time_order) const {
    Jet<cplx> jet;
    for (const auto& mode : modes_) {
        const cplx tf = mode.time.eval(t, time_order);
        const Jet<double> s = mode.space.eval(x);
        jet.value += tf * s.value;
        for (int i = 0; i < 3; ++i) {
            jet.grad[i] += tf * s.grad[i];
            for (int j = 0; j < 3; ++j) jet.hess[i][j] += tf * s.hess[i][j];
        }
    }
    return jet;
}

ManufacturedSolution::ManufacturedSolution(SpaceTimeField psi, std::array<SpaceTimeField, 3> a, SpaceTimeField phi,
                                           SeparableField potential)
    : psi_(std::move(psi)), a_(std::move(a)), phi_(std::move(phi)), potential_(std::move(potential)) {}

Jet<double> ManufacturedSolution::real_jet(const SpaceTimeField& f, const Vec3& x, double t, int order) {
    const Jet<cplx> c = f.eval(x, t, order);
    Jet<double> r;
    r.value = c.value.real();
    for (int i = 0; i < 3; ++i) {
        r.grad[i] = c.grad[i].real();
        for (int j = 0; j < 3; ++j) r.hess[i][j] = c.hess[i][j].real();
    }
    return r;
}

Vec3 ManufacturedSolution::vector_potential(const Vec3& x, double t, int time_order) const {
    Vec3 v{};
    for (int i = 0; i < 3; ++i) v[i] = a_[i].eval(x, t, time_order).value.real();
    return v;
}

Mat3 ManufacturedSolution::jacobian_a(const Vec3& x, double t, int time_order) const {
    Mat3 m{};
    for (int i = 0; i < 3; ++i) {
        const Jet<cplx> c = a_[i].eval(x, t, time_order);
        for (int j = 0; j < 3; ++j) m[i][j] = c.grad[j].real();
    }
    return m;
}

double ManufacturedSolution::div_a(const Vec3& x, double t) const {
    const Mat3 j = jacobian_a(x, t);
    return j[0][0] + j[1][1] + j[2][2];
}

Vec3 ManufacturedSolution::curl_a(const Vec3& x, double t) const {
    const Mat3 j = jacobian_a(x, t);
    return {j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]};
}

Vec3 ManufacturedSolution::laplacian_a(const Vec3& x, double t) const {
    Vec3 v{};
    for (int i = 0; i < 3; ++i) v[i] = a_[i].eval(x, t).laplacian().real();
    return v;
}

Vec3 ManufacturedSolution::grad_div_a(const Vec3& x, double t) const {
    Vec3 v{};
    for (int i = 0; i < 3; ++i) {
        const Jet<cplx> c = a_[i].eval(x, t);
        for (int j = 0; j < 3; ++j) v[j] += c.hess[i][j].real();
    }
    return v;
}

cplx ManufacturedSolution::forcing_g(const Vec3& x, double t) const {
    const cplx i1(0.0, 1.0);
    const Jet<cplx> p = psi_.eval(x, t);
    const cplx pt = psi_.eval(x, t, 1).value;
    const Vec3 a = vector_potential(x, t);
    cplx a_grad{};
    double a2 = 0.0;
    for (int d = 0; d < 3; ++d) {
        a_grad += a[d] * p.grad[d];
        a2 += a[d] * a[d];
    }
    // (i grad + A)^2 Psi = -lap Psi + 2i A.grad Psi + i (div A) Psi + |A|^2 Psi
    const cplx magnetic = -p.laplacian() + 2.0 * i1 * a_grad + i1 * div_a(x, t) * p.value + a2 * p.value;
    return -i1 * pt + 0.5 * magnetic + (potential(x) + phi(x, t)) * p.value;
}

Vec3 ManufacturedSolution::forcing_f(const Vec3& x, double t) const {
    const Jet<cplx> p = psi_.eval(x, t);
    const double rho = std::norm(p.value);
    const Vec3 a = vector_potential(x, t);
    const Vec3 att = vector_potential(x, t, 2);
    const Vec3 lap = laplacian_a(x, t);
    const Vec3 gdiv = grad_div_a(x, t);
    const Vec3 gphit = grad_phi(x, t, 1);
    Vec3 f{};
    for (int d = 0; d < 3; ++d) {
        // (i/2)(Psi* dPsi - Psi dPsi*) = -Im(Psi* dPsi)
        const double current = -(std::conj(p.value) * p.grad[d]).imag();
        f[d] = att[d] + (gdiv[d] - lap[d]) + gphit[d] + current + rho * a[d];
    }
    return f;
}

double ManufacturedSolution::forcing_h(const Vec3& x, double t) const {
    return -laplacian_phi(x, t) - std::norm(psi(x, t));
}

ComplexFieldFn ManufacturedSolution::psi_at(double t) const {
    return {[this, t](const Vec3& x) { return psi(x, t); }, [this, t](const Vec3& x) { return grad_psi(x, t); }};
}

VectorFieldFn ManufacturedSolution::a_at(double t, int time_order) const {
    return {[this, t, time_order](const Vec3& x) { return vector_potential(x, t, time_order); },
            [this, t, time_order](const Vec3& x) { return jacobian_a(x, t, time_order); }};
}

ScalarFieldFn ManufacturedSolution::phi_at(double t) const {
    return {[this, t](const Vec3& x) { return phi(x, t); }, [this, t](const Vec3& x) { return grad_phi(x, t); }};
}

std::function<double(const Vec3&)> ManufacturedSolution::potential_fn() const {
    return [this](const Vec3& x) { return potential(x); };
}

namespace {

SeparableTerm term(double coef, Factor fx, Factor fy, Factor fz) { return {coef, {fx, fy, fz}}; }

// b(x) = (sin(2 pi z)(1 - cos(2 pi x)) sin(pi y), 0, s sin(2 pi x)(1 - cos(2 pi z)) sin(pi y)), scaled.
std::array<SeparableField, 3> stream_field(double scale, double s) {
    using F = Factor;
    SeparableField b1{term(scale, F::one(), F::sine(1), F::sine(2)), term(-scale, F::cosine(2), F::sine(1), F::sine(2))};
    SeparableField b3{term(s * scale, F::sine(2), F::sine(1), F::one()),
                      term(-s * scale, F::sine(2), F::sine(1), F::cosine(2))};
    return {b1, SeparableField{}, b3};
}

}  // namespace

ManufacturedSolution conservation_example(bool div_fix) {
    using F = Factor;
    SpaceTimeField psi;
    psi.add(TimeFactor::constant(), {term(2.0, F::sine(1), F::sine(1), F::sine(1)),
                                     term(2.0, F::sine(2), F::sine(2), F::sine(2))});
    const auto b = stream_field(5.0, div_fix ? -1.0 : 1.0);
    std::array<SpaceTimeField, 3> a;
    for (int i = 0; i < 3; ++i) a[i].add(TimeFactor::constant(), b[i]);
    SpaceTimeField phi;
    SeparableField v{term(5.0, F::one(), F::one(), F::one())};
    return {std::move(psi), std::move(a), std::move(phi), std::move(v)};
}

ManufacturedSolution convergence_example(bool div_fix) {
    using F = Factor;
    SpaceTimeField psi;
    psi.add(TimeFactor::phase(kPi), {term(5.0, F::sine(2), F::sine(2), F::sine(2))});

    const std::array<SeparableField, 3> curl_part{
        SeparableField{term(1.0, F::cosine(1), F::sine(1), F::sine(1))},
        SeparableField{term(1.0, F::sine(1), F::cosine(1), F::sine(1))},
        SeparableField{term(-2.0, F::sine(1), F::sine(1), F::cosine(1))}};
    const auto b = stream_field(1.0, div_fix ? -1.0 : 1.0);
    std::array<SpaceTimeField, 3> a;
    for (int i = 0; i < 3; ++i) {
        a[i].add(TimeFactor::sine(kPi), curl_part[i]);
        a[i].add(TimeFactor::cosine(kPi), b[i]);
    }

    const F bubble = F::poly(0.0, 1.0, -1.0);
    SpaceTimeField phi;
    phi.add(TimeFactor::sine(kPi), {term(4.0, bubble, bubble, bubble)});
    phi.add(TimeFactor::cosine(kPi), {term(1.0, F::sine(1), F::sine(1), F::sine(1))});

    SeparableField v{term(0.5, F::poly(0.0, 0.0, 1.0), F::one(), F::one()),
                     term(0.5, F::one(), F::poly(0.0, 0.0, 1.0), F::one()),
                     term(0.5, F::one(), F::one(), F::poly(0.0, 0.0, 1.0))};
    return {std::move(psi), std::move(a), std::move(phi), std::move(v)};
}

}  // namespace msc
