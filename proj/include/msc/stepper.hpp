#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "msc/diagnostics.hpp"
#include "msc/projection.hpp"

namespace msc {

enum class Example { Free, Manufactured, Custom };

std::string example_name(Example e);
/// Accepts "free", "manufactured", "custom"; throws ConfigError otherwise.
Example parse_example(const std::string& s);

struct SchemeConfig {
    int n = 8;
    int order = 2;
    double tau = 0.02;
    double t_final = 1.0;
    double picard_tol = 1e-10;
    int picard_max_iters = 50;
    double linear_tol = 1e-12;
    Example example = Example::Free;
    /// Potential for the custom example: "five" (V = 5), "harmonic" (|x|^2/2) or a number.
    std::string potential = "five";
    bool div_fix = true;

    /// Number of time steps T / tau; throws ConfigError when the ratio is not
    /// an integer within 1e-12 or any field is out of range.
    int steps() const;
    void validate() const;
};

/// Per-step unknowns at level k, with A at k-1 kept for the next Maxwell step.
struct State {
    int step = 0;
    double time = 0.0;
    ComplexFunction psi;
    RealFunction a;
    RealFunction a_prev;
    RealFunction phi;
    RealFunction p;
};

struct PicardReport {
    int iterations = 0;
    /// Relative L2 change of the midpoint iterate, one entry per iteration.
    std::vector<double> updates;
    /// updates[j] / updates[j-1].
    std::vector<double> ratios() const;
};

/// The Picard iteration of the Schrodinger-Poisson step did not reach the
/// tolerance (or produced non-finite values).
class NonContraction : public Error {
public:
    NonContraction(const std::string& what, double tau, std::vector<double> history)
        : Error(what), tau_(tau), history_(std::move(history)) {}
    double tau() const noexcept { return tau_; }
    const std::vector<double>& history() const noexcept { return history_; }

private:
    double tau_;
    std::vector<double> history_;
};

/// Initial data, potential and optional forcing of one run.
struct ProblemData {
    std::function<cplx(const Vec3&)> psi0;
    VectorFieldFn a0;
    VectorFieldFn a1;
    std::function<double(const Vec3&)> potential;
    /// Analytic fields the evaluators above refer to.
    std::shared_ptr<const ManufacturedSolution> fields;
    /// Add the forcings g, f, h of `fields` (manufactured runs).
    bool forced = false;

    static ProblemData from_config(const SchemeConfig& cfg);
};

struct MaxwellResult {
    RealFunction a;
    RealFunction p;
    SolverReport report;
};

struct SchrodingerResult {
    ComplexFunction psi;
    RealFunction phi;
    PicardReport picard;
    /// B(Abar; ., .) on the full psi space, reused by the energy.
    ComplexMatrix magnetic;
};

/// Scheme II on one mesh: owns spaces, constant matrices and solvers.
class Stepper {
public:
    Stepper(const SchemeConfig& cfg, ProblemData data);

    const SchemeConfig& config() const noexcept { return cfg_; }
    const SpaceSet& spaces() const noexcept { return spaces_; }
    const ProblemData& data() const noexcept { return data_; }

    State initialize();
    /// A^k, p^k from A^{k-1} = s.a, A^{k-2} = s.a_prev, Psi^{k-1} = s.psi;
    /// forcing f at t^{k-1} = s.time.
    MaxwellResult maxwell_step(const State& s);
    /// Psi^k, phi^k given A^k; forcings g at t^{k-1/2}, h at t^k.
    SchrodingerResult schrodinger_poisson_step(const State& s, const RealFunction& a_new);
    /// Both halves; the returned state is at level k + 1. `record` receives
    /// its diagnostics.
    State advance(const State& s, PicardReport* picard = nullptr, DiagnosticsRecord* record = nullptr);

    DiagnosticsRecord diagnose(const State& s, int picard_iterations = 0,
                               const ComplexMatrix* magnetic = nullptr) const;

    /// LU factorizations of the Schrodinger system so far. Later systems are
    /// solved by iterative refinement against the last factor while that
    /// converges quickly, and refactored otherwise.
    int schrodinger_factorizations() const noexcept { return schrodinger_factorizations_; }

private:
    std::vector<cplx> solve_schrodinger(const ComplexMatrix& reduced, std::span<const cplx> b);
    /// (h(t), u) on the phi space; empty for unforced runs.
    std::vector<double> h_load(double t) const;
    RealFunction solve_poisson(const ComplexFunction& psi, std::span<const double> h) const;

    SchemeConfig cfg_;
    ProblemData data_;
    SpaceSet spaces_;
    SolverOptions linear_;
    RealMatrix psi_mass_, phi_stiffness_, vec_mass_, maxwell_, pairing_;
    std::vector<double> multiplier_mass_diag_;
    SpdSolver poisson_;
    SaddleSolver maxwell_solver_;
    ComplexSolver schrodinger_solver_;
    int schrodinger_factorizations_ = 0;
    EnergyEvaluator energy_;
};

struct RunResult {
    DiagnosticsRecord initial;
    std::vector<DiagnosticsRecord> records;
    State final_state;
    std::optional<ErrorRecord> errors;
    std::vector<PicardReport> picard;
};

struct RunObserver {
    std::function<void(const DiagnosticsRecord&)> on_record;
    std::function<void(const State&, const Stepper&)> on_state;
};

/// Advances k = 1..M. Errors at T are filled in manufactured mode.
RunResult run(const SchemeConfig& cfg, const RunObserver& observer = {});

/// H1 errors of a state against the manufactured solution at its time.
ErrorRecord final_errors(const Stepper& stepper, const State& s);

/// Time step tied to the mesh: tau ~ h for order 2, tau ~ sqrt(h) for order 1
/// with h = 1/N, shortened to T / ceil(T / tau) so the run ends at T.
double coupled_time_step(int n, int order, double t_final);

/// Manufactured runs on each mesh with the coupled time step; one error row
/// per mesh, handed to `on_row` as soon as it is available.
std::vector<ErrorRecord> convergence_sweep(const SchemeConfig& base, std::span<const int> meshes,
                                           const std::function<void(const ErrorRecord&)>& on_row = {});

}  // namespace msc
