#include "msc/stepper.hpp"

#include <cmath>
#include <sstream>

namespace msc {

namespace {

const cplx I(0.0, 1.0);

std::shared_ptr<const Mesh> make_mesh(int n) {
    if (n < 1) throw ConfigError("n must be >= 1");
    return std::make_shared<const Mesh>(n);
}

// a*x + b*y elementwise, sizes checked by the caller
std::vector<double> combine(double a, std::span<const double> x, double b, std::span<const double> y) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
    return out;
}

void add_scaled(RealMatrix& m, double s, const RealMatrix& other) {
    if (!m.same_pattern(other)) throw ShapeError("operator patterns differ");
    auto v = m.values();
    const auto o = other.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += s * o[i];
}

double weighted_norm(const RealMatrix& mass, std::span<const cplx> x) {
    const auto mx = multiply(mass, x);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::real(std::conj(x[i]) * mx[i]);
    return std::sqrt(std::max(s, 0.0));
}

bool all_finite(std::span<const cplx> x) {
    for (const auto& v : x)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

const SchemeConfig& validated(const SchemeConfig& cfg) {
    cfg.validate();
    return cfg;
}

std::function<double(const Vec3&)> custom_potential(const std::string& spec) {
    if (spec == "five") return [](const Vec3&) { return 5.0; };
    if (spec == "harmonic") return [](const Vec3& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); };
    std::istringstream in(spec);
    double c = 0.0;
    if (!(in >> c) || !(in >> std::ws).eof() || !std::isfinite(c))
        throw ConfigError("potential must be five, harmonic or a number, got '" + spec + "'");
    return [c](const Vec3&) { return c; };
}

}  // namespace

std::string example_name(Example e) {
    switch (e) {
        case Example::Free: return "free";
        case Example::Manufactured: return "manufactured";
        case Example::Custom: return "custom";
    }
    return "free";
}

Example parse_example(const std::string& s) {
    if (s == "free") return Example::Free;
    if (s == "manufactured") return Example::Manufactured;
    if (s == "custom") return Example::Custom;
    throw ConfigError("unknown example '" + s + "' (free, manufactured, custom)");
}

void SchemeConfig::validate() const {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (order != 1 && order != 2) throw ConfigError("order must be 1 or 2");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be positive");
    if (!(t_final >= tau) || !std::isfinite(t_final)) throw ConfigError("t_final must be >= tau");
    if (!(picard_tol > 0.0)) throw ConfigError("picard_tol must be positive");
    if (picard_max_iters < 1) throw ConfigError("picard_max_iters must be >= 1");
    if (!(linear_tol > 0.0)) throw ConfigError("linear_tol must be positive");
    if (example == Example::Custom) (void)custom_potential(potential);
    (void)steps();
}

int SchemeConfig::steps() const {
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    const double ratio = t_final / tau;
    const double m = std::round(ratio);
    if (std::abs(ratio - m) > 1e-12 * std::max(1.0, ratio) || m < 1.0)
        throw ConfigError("t_final / tau must be a positive integer");
    return static_cast<int>(m);
}

std::vector<double> PicardReport::ratios() const {
    std::vector<double> r;
    for (std::size_t j = 1; j < updates.size(); ++j) r.push_back(updates[j] / updates[j - 1]);
    return r;
}

ProblemData ProblemData::from_config(const SchemeConfig& cfg) {
    ProblemData d;
    if (cfg.example == Example::Manufactured) {
        d.fields = std::make_shared<const ManufacturedSolution>(convergence_example(cfg.div_fix));
        d.forced = true;
    } else {
        d.fields = std::make_shared<const ManufacturedSolution>(conservation_example(cfg.div_fix));
    }
    const auto* ms = d.fields.get();
    d.psi0 = ms->psi_at(0.0).value;
    if (cfg.example == Example::Custom) {
        const VectorFieldFn zero{[](const Vec3&) { return Vec3{}; }, [](const Vec3&) { return Mat3{}; }};
        d.a0 = zero;
        d.a1 = zero;
        d.potential = custom_potential(cfg.potential);
    } else {
        d.a0 = ms->a_at(0.0);
        d.a1 = ms->a_at(0.0, 1);
        d.potential = ms->potential_fn();
    }
    return d;
}

Stepper::Stepper(const SchemeConfig& cfg, ProblemData data)
    : cfg_(validated(cfg)),
      data_(std::move(data)),
      spaces_(SpaceSet::make(make_mesh(cfg.n), cfg.order)),
      linear_{SolverMethod::Direct, cfg.linear_tol},
      psi_mass_(assemble_scalar_mass(*spaces_.psi)),
      phi_stiffness_(assemble_scalar_stiffness(*spaces_.phi)),
      vec_mass_(assemble_vector_mass(*spaces_.vec)),
      maxwell_(assemble_maxwell_operator(*spaces_.vec)),
      pairing_(reduce(assemble_div_pairing(*spaces_.multiplier, *spaces_.vec), *spaces_.multiplier, *spaces_.vec)),
      poisson_(reduce(phi_stiffness_, *spaces_.phi, *spaces_.phi), linear_),
      maxwell_solver_(linear_),
      schrodinger_solver_(linear_),
      energy_(spaces_, data_.potential) {
    if (!data_.psi0 || !data_.a0.value || !data_.a1.value || !data_.potential)
        throw InvalidArgument("problem data is incomplete");
    if (data_.forced && !data_.fields) throw InvalidArgument("forced run needs analytic fields");
    const RealMatrix mp = reduce(assemble_scalar_mass(*spaces_.multiplier), *spaces_.multiplier, *spaces_.multiplier);
    multiplier_mass_diag_.resize(mp.rows());
    for (int j = 0; j < mp.rows(); ++j) multiplier_mass_diag_[j] = mp.coeff(j, j);
}

std::vector<double> Stepper::h_load(double t) const {
    if (!data_.forced) return {};
    const auto* ms = data_.fields.get();
    return assemble_load(*spaces_.phi, [ms, t](const Vec3& x) { return ms->forcing_h(x, t); });
}

RealFunction Stepper::solve_poisson(const ComplexFunction& psi, std::span<const double> h) const {
    auto rhs = assemble_density_load(psi, *spaces_.phi);
    if (!h.empty())
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += h[i];
    auto sol = poisson_.solve(spaces_.phi->restrict_to_free<double>(rhs));
    if (sol.report.breakdown) throw SolverBreakdown("Poisson solve failed", sol.report);
    return RealFunction(spaces_.phi, spaces_.phi->extend_from_free<double>(sol.x));
}

State Stepper::initialize() {
    State s;
    s.step = 0;
    s.time = 0.0;
    s.psi = interpolate_scalar(spaces_.psi, data_.psi0);
    RitzProjector projector(spaces_.vec, spaces_.multiplier, linear_);
    s.a = projector.project(data_.a0);
    const RealFunction a1 = projector.project(data_.a1);
    s.a_prev = RealFunction(spaces_.vec, combine(1.0, s.a.coefficients(), -cfg_.tau, a1.coefficients()));
    s.phi = solve_poisson(s.psi, h_load(0.0));
    s.p = RealFunction(spaces_.multiplier);
    return s;
}

MaxwellResult Stepper::maxwell_step(const State& s) {
    const FeSpace& vec = *spaces_.vec;
    const double tau = cfg_.tau;
    const RealMatrix w = assemble_weighted_vector_mass(vec, s.psi);

    RealMatrix k = vec_mass_;
    for (auto& v : k.values()) v /= tau * tau;
    add_scaled(k, 0.5, maxwell_);
    add_scaled(k, 0.25, w);

    const auto a1 = s.a.coefficients();
    const auto a2 = s.a_prev.coefficients();
    const auto inertia = vec_mass_ * std::span<const double>(combine(2.0 / (tau * tau), a1, -1.0 / (tau * tau), a2));
    const auto stiff = maxwell_ * a2;
    const auto coupling = w * std::span<const double>(combine(2.0, a1, 1.0, a2));
    const auto current = assemble_current(s.psi, vec);
    std::vector<double> rhs(inertia.size());
    for (std::size_t i = 0; i < rhs.size(); ++i)
        rhs[i] = inertia[i] - 0.5 * stiff[i] - 0.25 * coupling[i] - current[i];
    if (data_.forced) {
        const auto* ms = data_.fields.get();
        const double t = s.time;
        const auto f = assemble_vector_load(vec, [ms, t](const Vec3& x) { return ms->forcing_f(x, t); });
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += f[i];
    }

    maxwell_solver_.factorize(reduce(k, vec, vec), pairing_);
    const std::vector<double> g(pairing_.rows(), 0.0);
    SaddleSolution sol = maxwell_solver_.solve(vec.restrict_to_free<double>(rhs), g);
    if (sol.report.breakdown) throw SolverBreakdown("Maxwell saddle solve failed", sol.report);
    MaxwellResult r;
    r.a = RealFunction(spaces_.vec, vec.extend_from_free<double>(sol.primal));
    r.p = RealFunction(spaces_.multiplier, spaces_.multiplier->extend_from_free<double>(sol.multiplier));
    r.report = sol.report;
    return r;
}

SchrodingerResult Stepper::schrodinger_poisson_step(const State& s, const RealFunction& a_new) {
    const FeSpace& ps = *spaces_.psi;
    const double tau = cfg_.tau;
    const double t_new = (s.step + 1) * tau;
    const double t_half = (s.step + 0.5) * tau;

    SchrodingerResult out;
    out.magnetic = assemble_magnetic_schrodinger(
        ps, RealFunction(spaces_.vec, combine(0.5, a_new.coefficients(), 0.5, s.a.coefficients())));
    if (!out.magnetic.same_pattern(psi_mass_)) throw ShapeError("operator patterns differ");

    auto rhs = multiply(psi_mass_, s.psi.coefficients());
    if (data_.forced) {
        const auto* ms = data_.fields.get();
        const auto g = assemble_load(ps, [ms, t_half](const Vec3& x) { return ms->forcing_g(x, t_half); });
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += I * (0.5 * tau) * g[i];
    }
    const auto rhs_free = ps.restrict_to_free<cplx>(rhs);

    // W + i tau/4 S, completed by i tau/2 Q(V + phibar) inside the loop
    ComplexMatrix base = out.magnetic;
    {
        auto v = base.values();
        const auto m = psi_mass_.values();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = m[i] + I * (0.25 * tau) * v[i];
    }

    const auto psi_prev = s.psi.coefficients();
    std::vector<cplx> bar(psi_prev.begin(), psi_prev.end());
    RealFunction phibar = s.phi;
    ComplexFunction psi_new(spaces_.psi);
    RealFunction phi_new(spaces_.phi);
    const auto h_new = h_load(t_new);
    const RealMatrix& v_mass = energy_.potential_mass();
    ScalarWeight weight{nullptr, &phibar};
    bool converged = false;
    for (int it = 1; it <= cfg_.picard_max_iters; ++it) {
        const RealMatrix q = assemble_weighted_scalar_mass(ps, weight);
        if (!q.same_pattern(base) || !v_mass.same_pattern(base)) throw ShapeError("operator patterns differ");
        ComplexMatrix sys = base;
        {
            auto v = sys.values();
            const auto qv = q.values();
            const auto vv = v_mass.values();
            for (std::size_t i = 0; i < v.size(); ++i) v[i] += I * (0.5 * tau) * (qv[i] + vv[i]);
        }
        auto next = ps.extend_from_free<cplx>(solve_schrodinger(reduce(sys, ps, ps), rhs_free));

        std::vector<cplx> diff(next.size());
        for (std::size_t i = 0; i < next.size(); ++i) diff[i] = next[i] - bar[i];
        const double dn = weighted_norm(psi_mass_, diff);
        const double nn = weighted_norm(psi_mass_, next);
        const double change = dn == 0.0 ? 0.0 : dn / std::max(nn, 1e-300);
        out.picard.updates.push_back(change);
        out.picard.iterations = it;
        if (!std::isfinite(change) || !all_finite(next))
            throw NonContraction("Picard iteration produced non-finite values", tau, out.picard.updates);
        bar = std::move(next);

        auto pc = psi_new.coefficients();
        for (std::size_t i = 0; i < pc.size(); ++i) pc[i] = 2.0 * bar[i] - psi_prev[i];
        phi_new = solve_poisson(psi_new, h_new);
        phibar = RealFunction(spaces_.phi, combine(0.5, phi_new.coefficients(), 0.5, s.phi.coefficients()));
        if (change <= cfg_.picard_tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "Picard iteration did not contract within " << cfg_.picard_max_iters << " iterations at tau = " << tau
            << " (last update " << out.picard.updates.back() << ")";
        throw NonContraction(msg.str(), tau, out.picard.updates);
    }
    out.psi = std::move(psi_new);
    out.phi = std::move(phi_new);
    return out;
}

std::vector<cplx> Stepper::solve_schrodinger(const ComplexMatrix& m, std::span<const cplx> b) {
    const double tol = cfg_.linear_tol;
    const double bn = norm2(b);
    if (bn == 0.0) return std::vector<cplx>(b.size());
    if (schrodinger_factorizations_ > 0) {
        // refinement against the lagged factor (an earlier iterate or step);
        // give up unless each pass gains at least a factor 4
        std::vector<cplx> x(b.size()), r(b.begin(), b.end());
        double rn = bn;
        for (int pass = 0; pass < 12; ++pass) {
            auto d = schrodinger_solver_.solve(r);
            if (d.report.breakdown) break;
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += d.x[i];
            const auto mx = m * std::span<const cplx>(x);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - mx[i];
            const double next = norm2(r);
            if (!std::isfinite(next)) break;
            if (next <= tol * bn) return x;
            if (next > 0.25 * rn) break;
            rn = next;
        }
    }
    schrodinger_solver_.factorize(m);
    ++schrodinger_factorizations_;
    auto sol = schrodinger_solver_.solve(b);
    if (sol.report.breakdown) throw SolverBreakdown("Schrodinger solve failed", sol.report);
    return sol.x;
}

DiagnosticsRecord Stepper::diagnose(const State& s, int picard_iterations, const ComplexMatrix* magnetic) const {
    DiagnosticsRecord r;
    r.step = s.step;
    r.time = s.time;
    r.charge = total_charge(s.psi, psi_mass_);
    r.energy = energy_.evaluate(s.psi, s.a, s.a_prev, s.phi, cfg_.tau, magnetic).total();
    r.div_residual = divergence_residual(s.a, pairing_, multiplier_mass_diag_);
    r.picard_iterations = picard_iterations;
    return r;
}

State Stepper::advance(const State& s, PicardReport* picard, DiagnosticsRecord* record) {
    MaxwellResult m = maxwell_step(s);
    SchrodingerResult sp = schrodinger_poisson_step(s, m.a);
    State n;
    n.step = s.step + 1;
    n.time = n.step * cfg_.tau;
    n.psi = std::move(sp.psi);
    n.a_prev = s.a;
    n.a = std::move(m.a);
    n.phi = std::move(sp.phi);
    n.p = std::move(m.p);
    if (record) *record = diagnose(n, sp.picard.iterations, &sp.magnetic);
    if (picard) *picard = std::move(sp.picard);
    return n;
}

ErrorRecord final_errors(const Stepper& stepper, const State& s) {
    const auto& d = stepper.data();
    if (!d.fields || !d.forced) throw InvalidArgument("errors need a manufactured run");
    const auto* ms = d.fields.get();
    ErrorRecord e;
    e.n = stepper.config().n;
    e.h = 1.0 / e.n;
    e.tau = stepper.config().tau;
    e.err_psi = h1_error(s.psi, ms->psi_at(s.time));
    e.err_a = h1_error(s.a, ms->a_at(s.time));
    e.err_phi = h1_error(s.phi, ms->phi_at(s.time));
    return e;
}

RunResult run(const SchemeConfig& cfg, const RunObserver& observer) {
    cfg.validate();
    const int steps = cfg.steps();
    Stepper stepper(cfg, ProblemData::from_config(cfg));
    RunResult out;
    State s = stepper.initialize();
    out.initial = stepper.diagnose(s);
    if (observer.on_state) observer.on_state(s, stepper);
    for (int k = 1; k <= steps; ++k) {
        PicardReport pr;
        DiagnosticsRecord rec;
        s = stepper.advance(s, &pr, &rec);
        out.records.push_back(rec);
        out.picard.push_back(std::move(pr));
        if (observer.on_record) observer.on_record(rec);
        if (observer.on_state) observer.on_state(s, stepper);
    }
    if (cfg.example == Example::Manufactured) out.errors = final_errors(stepper, s);
    out.final_state = std::move(s);
    return out;
}

}  // namespace msc

namespace msc {

double coupled_time_step(int n, int order, double t_final) {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (!(t_final > 0.0)) throw ConfigError("t_final must be positive");
    const double h = 1.0 / n;
    const double target = order == 1 ? std::sqrt(h) : h;
    const double m = std::ceil(t_final / target - 1e-9);
    return t_final / std::max(1.0, m);
}

std::vector<ErrorRecord> convergence_sweep(const SchemeConfig& base, std::span<const int> meshes,
                                           const std::function<void(const ErrorRecord&)>& on_row) {
    std::vector<ErrorRecord> rows;
    for (int n : meshes) {
        SchemeConfig c = base;
        c.example = Example::Manufactured;
        c.n = n;
        c.tau = coupled_time_step(n, c.order, c.t_final);
        const auto r = run(c);
        rows.push_back(*r.errors);
        if (on_row) on_row(rows.back());
    }
    return rows;
}

}  // namespace msc
