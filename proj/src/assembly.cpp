#include "msc/assembly.hpp"

#include <cmath>
#include <optional>

namespace msc {

std::string_view form_name(FormKind kind) {
    switch (kind) {
        case FormKind::ScalarMass: return "ScalarMass";
        case FormKind::ScalarStiffness: return "ScalarStiffness";
        case FormKind::VectorMass: return "VectorMass";
        case FormKind::CurlCurl: return "CurlCurl";
        case FormKind::DivDiv: return "DivDiv";
        case FormKind::DivPairing: return "DivPairing";
        case FormKind::WeightedScalarMass: return "WeightedScalarMass";
        case FormKind::WeightedVectorMass: return "WeightedVectorMass";
        case FormKind::MagneticSchrodinger: return "MagneticSchrodinger";
        case FormKind::CurrentLoad: return "CurrentLoad";
        case FormKind::DensityLoad: return "DensityLoad";
        case FormKind::GenericLoad: return "GenericLoad";
    }
    return "?";
}

int integrand_degree(FormKind kind, int order, int weight_degree) {
    constexpr int vec = 2;
    switch (kind) {
        case FormKind::ScalarMass: return 2 * order;
        case FormKind::ScalarStiffness: return 2 * order - 2;
        case FormKind::VectorMass: return 2 * vec;
        case FormKind::CurlCurl:
        case FormKind::DivDiv: return 2 * vec - 2;
        case FormKind::DivPairing: return 1 + vec - 1;
        case FormKind::WeightedScalarMass: return 2 * order + weight_degree;
        case FormKind::WeightedVectorMass: return 2 * order + 2 * vec;
        case FormKind::MagneticSchrodinger: return 2 * order + 2 * vec;  // the |A|^2 u v term dominates
        case FormKind::CurrentLoad: return 2 * order - 1 + vec;
        case FormKind::DensityLoad: return 3 * order;
        case FormKind::GenericLoad: return -1;
    }
    return -1;
}

bool is_under_integrated(FormKind kind, int order, int weight_degree) {
    const int d = integrand_degree(kind, order, weight_degree);
    return d < 0 || d > keast_degree6().degree;
}

namespace {

// Element loop over a square form on `space`. `local(tet, geometry, tab, block)`
// fills the dense element block, local dof = node * components + component.
template <class T, class Local>
CsrMatrix<T> assemble_square(const FeSpace& space, Local&& local) {
    CsrMatrix<T> m = CsrMatrix<T>::zeros_like(space.pattern());
    const int comps = space.components();
    const int nl = space.element().size() * comps;
    ElementTabulation tab(space.element(), keast_degree6());
    std::vector<T> block(static_cast<std::size_t>(nl) * nl);
    std::vector<int> dofs(nl);
    auto values = m.values();
    for (int t = 0; t < space.mesh().tet_count(); ++t) {
        const TetGeometry g = TetGeometry::of(space.mesh(), t);
        tab.bind(g);
        const auto nodes = space.element_nodes(t);
        for (int a = 0; a < space.element().size(); ++a)
            for (int c = 0; c < comps; ++c) dofs[a * comps + c] = space.dof(nodes[a], c);
        std::fill(block.begin(), block.end(), T{});
        local(t, g, tab, block);
        for (int i = 0; i < nl; ++i)
            for (int j = 0; j < nl; ++j) values[m.find(dofs[i], dofs[j])] += block[i * nl + j];
    }
    return m;
}

template <class T, class Local>
std::vector<T> assemble_vector(const FeSpace& space, Local&& local) {
    std::vector<T> out(space.dof_count(), T{});
    const int comps = space.components();
    const int nl = space.element().size() * comps;
    ElementTabulation tab(space.element(), keast_degree6());
    std::vector<T> block(nl);
    for (int t = 0; t < space.mesh().tet_count(); ++t) {
        const TetGeometry g = TetGeometry::of(space.mesh(), t);
        tab.bind(g);
        std::fill(block.begin(), block.end(), T{});
        local(t, g, tab, block);
        const auto nodes = space.element_nodes(t);
        for (int a = 0; a < space.element().size(); ++a)
            for (int c = 0; c < comps; ++c) out[space.dof(nodes[a], c)] += block[a * comps + c];
    }
    return out;
}

void require_scalar(const FeSpace& s) {
    if (s.components() != 1) throw ShapeError("form needs a scalar space");
}
void require_vector(const FeSpace& s) {
    if (s.components() != 3) throw ShapeError("form needs a vector space");
}
void require_same_mesh(const FeSpace& a, const FeSpace& b) {
    if (&a.mesh() != &b.mesh()) throw ShapeError("spaces live on different meshes");
}

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Vector form with per-(a,c),(b,d) integrand `entry(q, a, c, b, d)`.
template <class Entry>
RealMatrix assemble_vector_form(const FeSpace& space, Entry&& entry) {
    require_vector(space);
    const int nb = space.element().size();
    const int nl = 3 * nb;
    return assemble_square<double>(space, [&](int, const TetGeometry&, const ElementTabulation& tab,
                                               std::vector<double>& block) {
        for (int q = 0; q < tab.points(); ++q) {
            const double w = tab.weight(q);
            for (int a = 0; a < nb; ++a)
                for (int c = 0; c < 3; ++c)
                    for (int b = 0; b < nb; ++b)
                        for (int d = 0; d < 3; ++d) block[(3 * a + c) * nl + 3 * b + d] += w * entry(tab, q, a, c, b, d);
        }
    });
}

}  // namespace

RealMatrix assemble_scalar_mass(const FeSpace& space) {
    require_scalar(space);
    const int nb = space.element().size();
    RealMatrix m = assemble_square<double>(space, [&](int, const TetGeometry&, const ElementTabulation& tab,
                                                      std::vector<double>& block) {
        for (int q = 0; q < tab.points(); ++q)
            for (int a = 0; a < nb; ++a)
                for (int b = 0; b < nb; ++b) block[a * nb + b] += tab.weight(q) * tab.value(q, a) * tab.value(q, b);
    });
    m.declare(Structure::Symmetric);
    return m;
}

RealMatrix assemble_scalar_stiffness(const FeSpace& space) {
    require_scalar(space);
    const int nb = space.element().size();
    RealMatrix m = assemble_square<double>(space, [&](int, const TetGeometry&, const ElementTabulation& tab,
                                                      std::vector<double>& block) {
        for (int q = 0; q < tab.points(); ++q)
            for (int a = 0; a < nb; ++a)
                for (int b = 0; b < nb; ++b)
                    block[a * nb + b] += tab.weight(q) * dot3(tab.grad(q, a), tab.grad(q, b));
    });
    m.declare(Structure::Symmetric);
    return m;
}

RealMatrix assemble_vector_mass(const FeSpace& space) {
    RealMatrix m = assemble_vector_form(space, [](const ElementTabulation& tab, int q, int a, int c, int b, int d) {
        return c == d ? tab.value(q, a) * tab.value(q, b) : 0.0;
    });
    m.declare(Structure::Symmetric);
    return m;
}

// curl(phi e_c) = grad phi x e_c, so
// (grad a x e_c).(grad b x e_d) = delta_cd grad a . grad b - d_d a d_c b.
RealMatrix assemble_curl_curl(const FeSpace& space) {
    RealMatrix m = assemble_vector_form(space, [](const ElementTabulation& tab, int q, int a, int c, int b, int d) {
        const Vec3& ga = tab.grad(q, a);
        const Vec3& gb = tab.grad(q, b);
        return (c == d ? dot3(ga, gb) : 0.0) - ga[d] * gb[c];
    });
    m.declare(Structure::Symmetric);
    return m;
}

RealMatrix assemble_div_div(const FeSpace& space) {
    RealMatrix m = assemble_vector_form(space, [](const ElementTabulation& tab, int q, int a, int c, int b, int d) {
        return tab.grad(q, a)[c] * tab.grad(q, b)[d];
    });
    m.declare(Structure::Symmetric);
    return m;
}

RealMatrix assemble_maxwell_operator(const FeSpace& space) {
    RealMatrix m = assemble_vector_form(space, [](const ElementTabulation& tab, int q, int a, int c, int b, int d) {
        const Vec3& ga = tab.grad(q, a);
        const Vec3& gb = tab.grad(q, b);
        return (c == d ? dot3(ga, gb) : 0.0) - ga[d] * gb[c] + ga[c] * gb[d];
    });
    m.declare(Structure::Symmetric);
    return m;
}

RealMatrix assemble_div_pairing(const FeSpace& multiplier, const FeSpace& vec) {
    require_scalar(multiplier);
    require_vector(vec);
    require_same_mesh(multiplier, vec);
    const int nm = multiplier.element().size();
    const int nv = vec.element().size();
    PatternBuilder builder(multiplier.dof_count(), vec.dof_count());
    std::vector<int> rows(nm), cols(3 * nv);
    auto gather = [&](int t) {
        const auto mn = multiplier.element_nodes(t);
        const auto vn = vec.element_nodes(t);
        for (int a = 0; a < nm; ++a) rows[a] = mn[a];
        for (int b = 0; b < nv; ++b)
            for (int d = 0; d < 3; ++d) cols[3 * b + d] = vec.dof(vn[b], d);
    };
    const int tets = vec.mesh().tet_count();
    for (int t = 0; t < tets; ++t) {
        gather(t);
        builder.add_block(rows, cols);
    }
    RealMatrix m = builder.build<double>();
    auto values = m.values();
    ElementTabulation tm(multiplier.element(), keast_degree6());
    ElementTabulation tv(vec.element(), keast_degree6());
    for (int t = 0; t < tets; ++t) {
        const TetGeometry g = TetGeometry::of(vec.mesh(), t);
        tm.bind(g);
        tv.bind(g);
        gather(t);
        for (int a = 0; a < nm; ++a)
            for (int b = 0; b < nv; ++b)
                for (int d = 0; d < 3; ++d) {
                    double s = 0.0;
                    for (int q = 0; q < tv.points(); ++q) s += tv.weight(q) * tm.value(q, a) * tv.grad(q, b)[d];
                    values[m.find(rows[a], cols[3 * b + d])] += s;
                }
    }
    return m;
}

RealMatrix assemble_weighted_scalar_mass(const FeSpace& space, const ScalarWeight& weight) {
    require_scalar(space);
    if (weight.field) require_same_mesh(space, weight.field->space());
    if (weight.vector_norm_squared) require_same_mesh(space, weight.vector_norm_squared->space());
    const int nb = space.element().size();
    std::optional<ElementTabulation> tf, ta;
    if (weight.field) tf.emplace(weight.field->space().element(), keast_degree6());
    if (weight.vector_norm_squared) ta.emplace(weight.vector_norm_squared->space().element(), keast_degree6());
    std::vector<ScalarSample<double>> fs;
    std::vector<VectorSample> as;
    std::vector<double> w;
    RealMatrix m = assemble_square<double>(space, [&](int t, const TetGeometry& g, const ElementTabulation& tab,
                                                      std::vector<double>& block) {
        w.assign(tab.points(), 0.0);
        if (weight.analytic)
            for (int q = 0; q < tab.points(); ++q) w[q] += weight.analytic(tab.point(q));
        if (tf) {
            tf->bind(g);
            sample_scalar(*weight.field, t, *tf, fs);
            for (int q = 0; q < tab.points(); ++q) w[q] += fs[q].value;
        }
        if (ta) {
            ta->bind(g);
            sample_vector(*weight.vector_norm_squared, t, *ta, as);
            for (int q = 0; q < tab.points(); ++q) w[q] += dot3(as[q].value, as[q].value);
        }
        for (int q = 0; q < tab.points(); ++q) {
            const double wq = tab.weight(q) * w[q];
            for (int a = 0; a < nb; ++a)
                for (int b = 0; b < nb; ++b) block[a * nb + b] += wq * tab.value(q, a) * tab.value(q, b);
        }
    });
    m.declare(Structure::Symmetric);
    return m;
}

RealMatrix assemble_weighted_vector_mass(const FeSpace& vec, const ComplexFunction& psi) {
    require_vector(vec);
    require_same_mesh(vec, psi.space());
    const int nb = vec.element().size();
    const int nl = 3 * nb;
    ElementTabulation tp(psi.space().element(), keast_degree6());
    std::vector<ScalarSample<cplx>> ps;
    RealMatrix m = assemble_square<double>(vec, [&](int t, const TetGeometry& g, const ElementTabulation& tab,
                                                    std::vector<double>& block) {
        tp.bind(g);
        sample_scalar(psi, t, tp, ps);
        for (int q = 0; q < tab.points(); ++q) {
            const double wq = tab.weight(q) * std::norm(ps[q].value);
            for (int a = 0; a < nb; ++a)
                for (int b = 0; b < nb; ++b) {
                    const double v = wq * tab.value(q, a) * tab.value(q, b);
                    for (int c = 0; c < 3; ++c) block[(3 * a + c) * nl + 3 * b + c] += v;
                }
        }
    });
    m.declare(Structure::Symmetric);
    return m;
}

// Row a (test u_a), column b (trial u_b):
//   grad u_b . grad u_a + |A|^2 u_a u_b + i (u_a A.grad u_b - u_b A.grad u_a)
ComplexMatrix assemble_magnetic_schrodinger(const FeSpace& space, const RealFunction& a) {
    require_scalar(space);
    require_vector(a.space());
    require_same_mesh(space, a.space());
    const int nb = space.element().size();
    ElementTabulation ta(a.space().element(), keast_degree6());
    std::vector<VectorSample> as;
    std::vector<double> adg(nb);
    ComplexMatrix m = assemble_square<cplx>(space, [&](int t, const TetGeometry& g, const ElementTabulation& tab,
                                                       std::vector<cplx>& block) {
        ta.bind(g);
        sample_vector(a, t, ta, as);
        for (int q = 0; q < tab.points(); ++q) {
            const double w = tab.weight(q);
            const Vec3& av = as[q].value;
            const double a2 = dot3(av, av);
            for (int i = 0; i < nb; ++i) adg[i] = dot3(av, tab.grad(q, i));
            for (int i = 0; i < nb; ++i) {
                const double ui = tab.value(q, i);
                for (int j = 0; j < nb; ++j) {
                    const double uj = tab.value(q, j);
                    const double re = dot3(tab.grad(q, i), tab.grad(q, j)) + a2 * ui * uj;
                    const double im = ui * adg[j] - uj * adg[i];
                    block[i * nb + j] += w * cplx(re, im);
                }
            }
        }
    });
    m.declare(Structure::Hermitian);
    return m;
}

std::vector<double> assemble_current(const ComplexFunction& psi, const FeSpace& vec) {
    require_vector(vec);
    require_same_mesh(vec, psi.space());
    const int nb = vec.element().size();
    ElementTabulation tp(psi.space().element(), keast_degree6());
    std::vector<ScalarSample<cplx>> ps;
    return assemble_vector<double>(vec, [&](int t, const TetGeometry& g, const ElementTabulation& tab,
                                            std::vector<double>& block) {
        tp.bind(g);
        sample_scalar(psi, t, tp, ps);
        for (int q = 0; q < tab.points(); ++q) {
            Vec3 j{};
            for (int d = 0; d < 3; ++d) j[d] = -(std::conj(ps[q].value) * ps[q].grad[d]).imag();
            for (int a = 0; a < nb; ++a) {
                const double v = tab.weight(q) * tab.value(q, a);
                for (int d = 0; d < 3; ++d) block[3 * a + d] += v * j[d];
            }
        }
    });
}

cplx current_pairing(const ComplexFunction& psi, const ComplexFunction& phi, const RealFunction& a) {
    require_same_mesh(psi.space(), phi.space());
    require_same_mesh(psi.space(), a.space());
    require_vector(a.space());
    const Mesh& mesh = psi.space().mesh();
    ElementTabulation t1(psi.space().element(), keast_degree6());
    ElementTabulation t2(phi.space().element(), keast_degree6());
    ElementTabulation t3(a.space().element(), keast_degree6());
    std::vector<ScalarSample<cplx>> s1, s2;
    std::vector<VectorSample> s3;
    const cplx half_i(0.0, 0.5);
    cplx total{};
    for (int t = 0; t < mesh.tet_count(); ++t) {
        const TetGeometry g = TetGeometry::of(mesh, t);
        t1.bind(g);
        t2.bind(g);
        t3.bind(g);
        sample_scalar(psi, t, t1, s1);
        sample_scalar(phi, t, t2, s2);
        sample_vector(a, t, t3, s3);
        for (int q = 0; q < t1.points(); ++q) {
            cplx s{};
            for (int d = 0; d < 3; ++d)
                s += (std::conj(s2[q].value) * s1[q].grad[d] - s1[q].value * std::conj(s2[q].grad[d])) *
                     s3[q].value[d];
            total += t1.weight(q) * half_i * s;
        }
    }
    return total;
}

std::vector<double> assemble_density_load(const ComplexFunction& psi, const FeSpace& test) {
    require_scalar(test);
    require_same_mesh(test, psi.space());
    const int nb = test.element().size();
    ElementTabulation tp(psi.space().element(), keast_degree6());
    std::vector<ScalarSample<cplx>> ps;
    return assemble_vector<double>(test, [&](int t, const TetGeometry& g, const ElementTabulation& tab,
                                             std::vector<double>& block) {
        tp.bind(g);
        sample_scalar(psi, t, tp, ps);
        for (int q = 0; q < tab.points(); ++q) {
            const double rho = tab.weight(q) * std::norm(ps[q].value);
            for (int a = 0; a < nb; ++a) block[a] += rho * tab.value(q, a);
        }
    });
}

std::vector<double> assemble_load(const FeSpace& space, const std::function<double(const Vec3&)>& f) {
    require_scalar(space);
    const int nb = space.element().size();
    return assemble_vector<double>(space, [&](int, const TetGeometry&, const ElementTabulation& tab,
                                              std::vector<double>& block) {
        for (int q = 0; q < tab.points(); ++q) {
            const double v = tab.weight(q) * f(tab.point(q));
            for (int a = 0; a < nb; ++a) block[a] += v * tab.value(q, a);
        }
    });
}

std::vector<cplx> assemble_load(const FeSpace& space, const std::function<cplx(const Vec3&)>& f) {
    require_scalar(space);
    const int nb = space.element().size();
    return assemble_vector<cplx>(space, [&](int, const TetGeometry&, const ElementTabulation& tab,
                                            std::vector<cplx>& block) {
        for (int q = 0; q < tab.points(); ++q) {
            const cplx v = tab.weight(q) * f(tab.point(q));
            for (int a = 0; a < nb; ++a) block[a] += v * tab.value(q, a);
        }
    });
}

std::vector<double> assemble_vector_load(const FeSpace& vec, const std::function<Vec3(const Vec3&)>& f) {
    require_vector(vec);
    const int nb = vec.element().size();
    return assemble_vector<double>(vec, [&](int, const TetGeometry&, const ElementTabulation& tab,
                                            std::vector<double>& block) {
        for (int q = 0; q < tab.points(); ++q) {
            const Vec3 v = f(tab.point(q));
            for (int a = 0; a < nb; ++a) {
                const double s = tab.weight(q) * tab.value(q, a);
                for (int d = 0; d < 3; ++d) block[3 * a + d] += s * v[d];
            }
        }
    });
}

std::vector<double> assemble_maxwell_load(const FeSpace& vec, const VectorFieldFn& field) {
    require_vector(vec);
    const int nb = vec.element().size();
    return assemble_vector<double>(vec, [&](int, const TetGeometry&, const ElementTabulation& tab,
                                            std::vector<double>& block) {
        for (int q = 0; q < tab.points(); ++q) {
            const Mat3 j = field.jacobian(tab.point(q));
            const double div = j[0][0] + j[1][1] + j[2][2];
            const Vec3 curl{j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]};
            const double w = tab.weight(q);
            for (int a = 0; a < nb; ++a) {
                const Vec3& g = tab.grad(q, a);
                // curl(u e_c) = grad u x e_c
                const std::array<Vec3, 3> curl_basis{Vec3{0.0, g[2], -g[1]}, Vec3{-g[2], 0.0, g[0]},
                                                     Vec3{g[1], -g[0], 0.0}};
                for (int c = 0; c < 3; ++c) block[3 * a + c] += w * (dot3(curl, curl_basis[c]) + div * g[c]);
            }
        }
    });
}

ManufacturedLoads assemble_manufactured_loads(const ManufacturedSolution& ms, double t_g, double t_f, double t_h,
                                              const SpaceSet& spaces) {
    ManufacturedLoads loads;
    loads.g = assemble_load(*spaces.psi, std::function<cplx(const Vec3&)>(
                                             [&](const Vec3& x) { return ms.forcing_g(x, t_g); }));
    loads.f = assemble_vector_load(*spaces.vec, [&](const Vec3& x) { return ms.forcing_f(x, t_f); });
    loads.h = assemble_load(*spaces.phi, std::function<double(const Vec3&)>(
                                             [&](const Vec3& x) { return ms.forcing_h(x, t_h); }));
    return loads;
}

}  // namespace msc
