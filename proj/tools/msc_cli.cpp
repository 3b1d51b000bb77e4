// Command line front end: conserve, mms, run, mesh-info.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "msc/config.hpp"
#include "msc/output.hpp"

using namespace msc;
namespace fs = std::filesystem;

namespace {

// Values given on the command line; applied after the config file.
struct Flags {
    std::string config;
    std::optional<int> n, order, picard_max_iters, vtk_every;
    std::optional<double> tau, t_final, picard_tol, linear_tol;
    std::optional<std::string> out, example, potential, meshes;
    std::optional<std::uint64_t> seed;
    bool no_div_fix = false;
};

void add_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "key = value config file");
    sub->add_option("--n", f.n, "cube subdivisions N");
    sub->add_option("--order", f.order, "element order r (1 or 2)");
    sub->add_option("--tau", f.tau, "time step");
    sub->add_option("--t-final", f.t_final, "final time T");
    sub->add_option("--out", f.out, "output directory");
    sub->add_flag("--no-div-fix", f.no_div_fix, "use the printed, non-solenoidal A fields");
    sub->add_option("--picard-tol", f.picard_tol, "Picard stopping tolerance");
    sub->add_option("--picard-max-iters", f.picard_max_iters, "Picard iteration budget");
    sub->add_option("--linear-tol", f.linear_tol, "linear solver relative tolerance");
    sub->add_option("--vtk-every", f.vtk_every, "VTK snapshot every S steps (0 = off)");
    sub->add_option("--meshes", f.meshes, "mesh list for mms, e.g. 4,8,16");
    sub->add_option("--example", f.example, "free, manufactured or custom");
    sub->add_option("--potential", f.potential, "custom potential: five, harmonic or a number");
    sub->add_option("--seed", f.seed, "random seed");
}

RunConfig command_defaults(const std::string& command) {
    RunConfig c;
    c.command = command;
    if (command == "conserve") {
        c.scheme.example = Example::Free;
        c.scheme.picard_tol = 1e-11;
    } else if (command == "mms") {
        c.scheme.example = Example::Manufactured;
        c.scheme.t_final = 2.0;
    }
    return c;
}

RunConfig resolve(const std::string& command, const Flags& f) {
    RunConfig c = command_defaults(command);
    if (!f.config.empty()) c = load_config(f.config, c);
    c.command = command;
    const auto set = [&](const char* key, const auto& v) {
        if (!v) return;
        if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>) apply_setting(c, key, *v);
        else if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, double>) apply_setting(c, key, format_real(*v));
        else apply_setting(c, key, std::to_string(*v));
    };
    set("n", f.n);
    set("order", f.order);
    set("tau", f.tau);
    set("t_final", f.t_final);
    set("picard_tol", f.picard_tol);
    set("picard_max_iters", f.picard_max_iters);
    set("linear_tol", f.linear_tol);
    set("vtk_every", f.vtk_every);
    set("out", f.out);
    set("example", f.example);
    set("potential", f.potential);
    set("meshes", f.meshes);
    set("seed", f.seed);
    if (f.no_div_fix) c.scheme.div_fix = false;
    return c;
}

fs::path prepare_out(const RunConfig& c) {
    fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + c.out);
    return dir;
}

std::string snapshot_name(int step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "state_%05d.vtk", step);
    return buf;
}

int time_run(const RunConfig& c) {
    c.scheme.validate();
    const fs::path dir = prepare_out(c);
    {
        std::ofstream cfg_out(dir / "config.txt");
        cfg_out << serialize_config(c);
    }
    ConservationCsv csv((dir / "conservation.csv").string());
    RunObserver obs;
    obs.on_record = [&](const DiagnosticsRecord& r) { csv.append(r); };
    if (c.vtk_every > 0)
        obs.on_state = [&](const State& s, const Stepper&) {
            if (s.step % c.vtk_every == 0) write_state_vtk((dir / snapshot_name(s.step)).string(), s);
        };
    const RunResult r = run(c.scheme, obs);
    double dq = 0.0, de = 0.0, div = 0.0;
    for (const auto& rec : r.records) {
        dq = std::max(dq, std::abs(rec.charge - r.initial.charge) / r.initial.charge);
        de = std::max(de, std::abs(rec.energy - r.initial.energy) / std::abs(r.initial.energy));
        div = std::max(div, rec.div_residual);
    }
    std::cout << r.records.size() << " steps, charge " << format_real(r.initial.charge) << ", energy "
              << format_real(r.initial.energy) << '\n'
              << "max relative charge drift " << dq << "\nmax relative energy drift " << de
              << "\nmax divergence residual " << div << '\n';
    if (r.errors) {
        std::ofstream e(dir / "errors.csv");
        write_errors_csv(e, std::span<const ErrorRecord>(&*r.errors, 1));
        std::cout << "H1 errors at T: psi " << r.errors->err_psi << ", A " << r.errors->err_a << ", phi "
                  << r.errors->err_phi << '\n';
    }
    std::cout << "wrote " << (dir / "conservation.csv").string() << '\n';
    return 0;
}

int cmd_conserve(const RunConfig& c) {
    if (c.scheme.example != Example::Free) throw ConfigError("conserve runs the free example");
    return time_run(c);
}

int cmd_mms(const RunConfig& c) {
    if (c.scheme.example != Example::Manufactured) throw ConfigError("mms runs the manufactured example");
    for (int n : c.meshes) {
        SchemeConfig probe = c.scheme;
        probe.n = n;
        probe.tau = coupled_time_step(n, probe.order, probe.t_final);
        probe.validate();
    }
    const fs::path dir = prepare_out(c);
    const std::string path = (dir / "errors.csv").string();
    std::vector<ErrorRecord> rows;
    convergence_sweep(c.scheme, c.meshes, [&](const ErrorRecord& e) {
        rows.push_back(e);
        std::ofstream out(path);
        write_errors_csv(out, rows);
        std::cout << "N=" << e.n << " tau=" << e.tau << "  psi " << e.err_psi << "  A " << e.err_a << "  phi "
                  << e.err_phi << std::endl;
    });
    std::cout << "wrote " << path << '\n';
    return 0;
}

int cmd_mesh_info(const RunConfig& c) {
    if (c.scheme.n < 1) throw ConfigError("n must be >= 1");
    if (c.scheme.order != 1 && c.scheme.order != 2) throw ConfigError("order must be 1 or 2");
    std::cout << mesh_summary(c.scheme.n, c.scheme.order);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Maxwell-Schrodinger solver in the Coulomb gauge"};
    app.require_subcommand(1);
    Flags f;
    const char* names[] = {"conserve", "mms", "run", "mesh-info"};
    const char* help[] = {"free run, writes conservation.csv", "convergence sweep, writes errors.csv",
                          "single run of any example", "mesh and space sizes"};
    std::vector<CLI::App*> subs;
    for (int i = 0; i < 4; ++i) {
        subs.push_back(app.add_subcommand(names[i], help[i]));
        add_flags(subs.back(), f);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        std::string command;
        for (int i = 0; i < 4; ++i)
            if (subs[i]->parsed()) command = names[i];
        const RunConfig c = resolve(command, f);
        if (command == "conserve") return cmd_conserve(c);
        if (command == "mms") return cmd_mms(c);
        if (command == "run") return time_run(c);
        return cmd_mesh_info(c);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NonContraction& e) {
        std::cerr << "Picard iteration did not contract (tau = " << e.tau() << "): " << e.what() << '\n';
        return 4;
    } catch (const SolverBreakdown& e) {
        std::cerr << "solver breakdown: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
