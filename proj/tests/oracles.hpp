#pragma once

// Reference computations used only by tests. Nothing here shares code with
// the library's quadrature or basis functions.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Vec3 = std::array<double, 3>;

/// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration on P_n.
inline void gauss_legendre01(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
}

/// Collapsed-coordinate product rule on the tetrahedron with corners c[0..3].
/// n points per direction integrates polynomials of degree 2n - 3 exactly.
inline double integrate_tet(const std::array<Vec3, 4>& c, const std::function<double(const Vec3&)>& f, int n = 8) {
    std::vector<double> x, w;
    gauss_legendre01(n, x, w);
    Vec3 e1, e2, e3;
    for (int d = 0; d < 3; ++d) {
        e1[d] = c[1][d] - c[0][d];
        e2[d] = c[2][d] - c[0][d];
        e3[d] = c[3][d] - c[0][d];
    }
    const double det = std::abs(e1[0] * (e2[1] * e3[2] - e2[2] * e3[1]) - e1[1] * (e2[0] * e3[2] - e2[2] * e3[0]) +
                                e1[2] * (e2[0] * e3[1] - e2[1] * e3[0]));
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const double u = x[i];
                const double v = x[j] * (1.0 - u);
                const double s = x[k] * (1.0 - u) * (1.0 - x[j]);
                const double jac = (1.0 - u) * (1.0 - u) * (1.0 - x[j]);
                Vec3 p;
                for (int d = 0; d < 3; ++d) p[d] = c[0][d] + u * e1[d] + v * e2[d] + s * e3[d];
                sum += w[i] * w[j] * w[k] * jac * f(p);
            }
    return sum * det;
}

/// Integral over the unit cube split into m^3 sub-cubes, tensor Gauss rule.
inline double integrate_cube(const std::function<double(const Vec3&)>& f, int m = 4, int n = 8) {
    std::vector<double> x, w;
    gauss_legendre01(n, x, w);
    const double hh = 1.0 / m;
    double sum = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        for (int k = 0; k < n; ++k)
                            sum += w[i] * w[j] * w[k] * f({(a + x[i]) * hh, (b + x[j]) * hh, (c + x[k]) * hh});
    return sum * hh * hh * hh;
}

/// int_{ref tet} x^a y^b z^c = a! b! c! / (a + b + c + 3)!
inline double simplex_monomial(int a, int b, int c) {
    return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) * std::tgamma(c + 1.0) / std::tgamma(a + b + c + 4.0);
}

/// Central difference of f along axis d.
template <class F>
auto central_diff(const F& f, Vec3 x, int d, double step) {
    Vec3 xp = x, xm = x;
    xp[d] += step;
    xm[d] -= step;
    return (f(xp) - f(xm)) / (2.0 * step);
}

/// Second central difference along axes d, e.
template <class F>
auto central_diff2(const F& f, Vec3 x, int d, int e, double step) {
    auto fd = [&](const Vec3& y) { return central_diff(f, y, e, step); };
    return central_diff(fd, x, d, step);
}

inline Vec3 random_point(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    return {u(rng), u(rng), u(rng)};
}

}  // namespace oracle
