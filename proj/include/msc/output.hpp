#pragma once

#include <fstream>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "msc/stepper.hpp"

namespace msc {

/// 17 significant digits: reads back to the same double.
std::string format_real(double x);

void write_conservation_header(std::ostream& out);
void write_conservation_row(std::ostream& out, const DiagnosticsRecord& r);

/// conservation.csv written row by row and flushed, so a failed run leaves
/// the steps it completed on disk.
class ConservationCsv {
public:
    explicit ConservationCsv(const std::string& path);
    void append(const DiagnosticsRecord& r);

private:
    std::ofstream out_;
};

/// errors.csv: one row per mesh with pairwise orders (blank where the
/// previous row is missing or h did not halve), then a "slope" footer with
/// least-squares slopes of log(err) against log(h).
void write_errors_csv(std::ostream& out, std::span<const ErrorRecord> rows);

/// Pairwise order of a field between consecutive rows, only for halved h.
std::optional<double> pairwise_order(const ErrorRecord& coarse, const ErrorRecord& fine, double ErrorRecord::*field);

/// Counts, h and dof counts of every space, as printed by mesh-info.
std::string mesh_summary(int n, int order);

/// psi (real, imaginary, density), A and phi at mesh vertices.
void write_state_vtk(const std::string& path, const State& s);

}  // namespace msc
