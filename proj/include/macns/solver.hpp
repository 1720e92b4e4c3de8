#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "macns/scheme.hpp"

namespace macns {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class LinearSolver { direct_sparse, iterative };

/// segregated: picard_step sweeps. coupled: one linear solve for (u, rho) with the mass flux and the
/// pressure linearized around the iterate, followed by the positivity-preserving mass solve.
enum class Coupling { coupled, segregated };

struct SolverConfig {
    std::vector<double> zeta_schedule{0.0, 0.25, 0.5, 0.75, 1.0};
    double picard_tol = 1e-9;
    int picard_max_iters = 200;
    double relaxation = 0.7;
    LinearSolver linear_solver = LinearSolver::direct_sparse;
    Coupling coupling = Coupling::coupled;
    double density_floor_warn = 1e-14;

    bool operator==(const SolverConfig&) const = default;
};

/// Throws ParamError on a malformed schedule or out-of-range setting.
void validate(const SolverConfig& config);

/// Sparse solve with the configured backend and optional iterative refinement steps.
/// Throws SolverError on breakdown.
Vector linear_solve(const SparseMatrix& A, const Vector& b, LinearSolver kind = LinearSolver::direct_sparse,
                    int refinements = 0);

/// Solves the mass system of u and returns rho rescaled to total mass M.
/// Throws SolverError when some rho_K is not positive.
CellField solve_mass(const MacGrid& g, const VelocityField& u, const SchemeParams& params, double zeta,
                     LinearSolver kind = LinearSolver::direct_sparse);

State solve_zeta0(const MacGrid& g, const SchemeParams& params, LinearSolver kind = LinearSolver::direct_sparse);

/// One segregated sweep: mass solve with u, momentum solve with the new rho, relaxation by omega.
State picard_step(const MacGrid& g, const State& s, const SchemeParams& params, double zeta, double omega,
                  LinearSolver kind = LinearSolver::direct_sparse);

/// Coupled step: u from the linearized (u, rho) system, relaxed by omega, then rho from solve_mass.
State coupled_step(const MacGrid& g, const State& s, const SchemeParams& params, double zeta, double omega,
                   LinearSolver kind = LinearSolver::direct_sparse);

/// Relative infinity norms of both residuals, scaled by 1 + the norm of the right side.
struct ResidualNorms {
    double mass = 0.0;
    double momentum = 0.0;
};
ResidualNorms residual_norms(const MacGrid& g, const State& s, const SchemeParams& params, double zeta);

struct StageTrace {
    double zeta = 0.0;
    int iterations = 0;
    double relaxation = 0.0;
    bool converged = false;
    std::vector<double> mass_residuals;
    std::vector<double> momentum_residuals;
};

struct SolveReport {
    bool success = false;
    std::string message;
    State state;
    std::vector<StageTrace> stages;
    ResidualNorms final_residuals;
    double h1_u = 0.0;
    double l2_p = 0.0;
    double l2gamma_rho = 0.0;
    double min_rho = 0.0;
    double total_mass = 0.0;
    /// Extremes over every mass solve along the path, intermediate ones included.
    double min_rho_all_solves = 0.0;
    double max_mass_defect_all_solves = 0.0;
    int mass_solves = 0;
    EnergyReport energy;
    double weak_bv = 0.0;
    double cs = 0.0;
    double wallclock_seconds = 0.0;
    std::vector<std::string> warnings;
};

SolveReport solve(const MacGrid& g, const SchemeParams& params, const SolverConfig& config = {});

/// `key: value` lines, arrays as space-separated values. Wallclock is the last line.
void write_report(std::ostream& os, const SolveReport& r);

}  // namespace macns
