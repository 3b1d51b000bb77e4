#include "msc/output.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

namespace msc {

std::string format_real(double x) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

void write_conservation_header(std::ostream& out) { out << "step,time,charge,energy,div_residual,picard_iters\n"; }

void write_conservation_row(std::ostream& out, const DiagnosticsRecord& r) {
    out << r.step << ',' << format_real(r.time) << ',' << format_real(r.charge) << ',' << format_real(r.energy) << ','
        << format_real(r.div_residual) << ',' << r.picard_iterations << '\n';
}

ConservationCsv::ConservationCsv(const std::string& path) : out_(path) {
    if (!out_) throw ConfigError("cannot write " + path);
    write_conservation_header(out_);
    out_.flush();
}

void ConservationCsv::append(const DiagnosticsRecord& r) {
    write_conservation_row(out_, r);
    out_.flush();
    if (!out_) throw Error("write to conservation.csv failed");
}

std::optional<double> pairwise_order(const ErrorRecord& coarse, const ErrorRecord& fine, double ErrorRecord::*field) {
    if (std::abs(fine.h * 2.0 - coarse.h) > 1e-12 * coarse.h) return std::nullopt;
    return convergence_order(coarse.*field, fine.*field);
}

namespace {

std::string optional_real(const std::optional<double>& x) { return x ? format_real(*x) : std::string(); }

constexpr double ErrorRecord::*kFields[] = {&ErrorRecord::err_psi, &ErrorRecord::err_a, &ErrorRecord::err_phi};

}  // namespace

void write_errors_csv(std::ostream& out, std::span<const ErrorRecord> rows) {
    out << "N,h,tau,err_psi_h1,err_A_h1,err_phi_h1,order_psi,order_A,order_phi\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out << r.n << ',' << format_real(r.h) << ',' << format_real(r.tau) << ',' << format_real(r.err_psi) << ','
            << format_real(r.err_a) << ',' << format_real(r.err_phi);
        for (auto f : kFields) out << ',' << (i ? optional_real(pairwise_order(rows[i - 1], r, f)) : std::string());
        out << '\n';
    }
    std::vector<double> h;
    for (const auto& r : rows) h.push_back(r.h);
    out << "slope,,,,,";
    for (auto f : kFields) {
        std::vector<double> e;
        for (const auto& r : rows) e.push_back(r.*f);
        out << ',' << optional_real(least_squares_slope(h, e));
    }
    out << '\n';
}

std::string mesh_summary(int n, int order) {
    const auto mesh = std::make_shared<const Mesh>(n);
    const SpaceSet s = SpaceSet::make(mesh, order);
    std::ostringstream o;
    o << "N = " << n << ", r = " << order << '\n'
      << mesh->vertex_count() << " vertices, " << mesh->tet_count() << " tets, " << mesh->boundary_faces().size()
      << " boundary faces\n"
      << "h = " << 1.0 / n << " (cube edge), diameter = " << mesh_diameter(*mesh) << '\n';
    const auto line = [&](const char* name, const FeSpace& sp) {
        o << name << ": P" << sp.order() << (sp.components() == 3 ? " vector" : " scalar") << ", " << sp.dof_count()
          << " dofs, " << sp.free_count() << " free\n";
    };
    line("psi", *s.psi);
    line("phi", *s.phi);
    line("A", *s.vec);
    line("multiplier", *s.multiplier);
    return o.str();
}

namespace {

// lattice node of mesh vertex v in a space of the given order
int vertex_node(const Mesh& mesh, const FeSpace& sp, int v) {
    const int r = sp.order();
    const Lattice3 p = mesh.vertex_lattice(v);
    const int l = sp.lattice_size();
    return r * p[0] + l * (r * p[1] + l * r * p[2]);
}

}  // namespace

void write_state_vtk(const std::string& path, const State& s) {
    const Mesh& mesh = s.psi.space().mesh();
    const int nv = mesh.vertex_count();
    NodalField re{"psi_re", 1, {}}, im{"psi_im", 1, {}}, rho{"density", 1, {}}, a{"A", 3, {}}, phi{"phi", 1, {}};
    for (int v = 0; v < nv; ++v) {
        const cplx z = s.psi.coefficients()[vertex_node(mesh, s.psi.space(), v)];
        re.values.push_back(z.real());
        im.values.push_back(z.imag());
        rho.values.push_back(std::norm(z));
        const FeSpace& vs = s.a.space();
        const int node = vertex_node(mesh, vs, v);
        for (int c = 0; c < 3; ++c) a.values.push_back(s.a.coefficients()[vs.dof(node, c)]);
        phi.values.push_back(s.phi.coefficients()[vertex_node(mesh, s.phi.space(), v)]);
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    const NodalField fields[] = {re, im, rho, a, phi};
    write_vtk(out, mesh, fields);
    if (!out) throw Error("write to " + path + " failed");
}

}  // namespace msc
