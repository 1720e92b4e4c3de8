#include "macns/solver.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

namespace macns {

namespace {

struct MassStats {
    double min_rho = std::numeric_limits<double>::infinity();
    double max_defect = 0.0;
    int count = 0;
};

bool finite(const VelocityField& u) {
    for (const auto& c : u.components)
        if (!c.values.allFinite()) return false;
    return true;
}

CellField solve_mass_tracked(const MacGrid& g, const VelocityField& u, const SchemeParams& params, double zeta,
                             LinearSolver kind, MassStats* stats) {
    const LinearSystem sys = assemble_mass_matrix(g, u, params, zeta);
    // One refinement step; the flux entries can dwarf the stabilization diagonal.
    const Vector rho = linear_solve(sys.matrix, sys.rhs, kind, 1);
    if (!rho.allFinite()) throw SolverError("mass solve produced non-finite density");
    const double min_rho = rho.minCoeff();
    if (!(min_rho > 0.0)) throw SolverError("mass solve produced non-positive density " + std::to_string(min_rho));
    CellField r{rho};
    // Roundoff projection onto the exact mass invariant.
    r.values *= params.mass / integral(g, r);
    if (stats) {
        stats->min_rho = std::min(stats->min_rho, r.values.minCoeff());
        stats->max_defect = std::max(stats->max_defect, std::abs(integral(g, r) - params.mass) / params.mass);
        ++stats->count;
    }
    return r;
}

VelocityField solve_momentum(const MacGrid& g, const CellField& rho, const VelocityField& u_frozen,
                             const SchemeParams& params, double zeta, LinearSolver kind) {
    const DofLayout layout(g);
    const LinearSystem sys = assemble_momentum_matrix(g, layout, rho, u_frozen, params, zeta);
    const Vector x = linear_solve(sys.matrix, sys.rhs, kind);
    if (!x.allFinite()) throw SolverError("momentum solve produced non-finite velocity");
    return layout.unpack(x);
}

// Newton-type target for (u, rho): mass flux and pressure linearized at s, donors and convective
// fluxes frozen at s.
State solve_coupled(const MacGrid& g, const State& s, const SchemeParams& params, double zeta,
                            LinearSolver kind) {
    const DofLayout layout(g);
    const int nu = layout.size(), nc = g.num_cells();
    const LinearSystem mom = assemble_momentum_matrix(g, layout, s.rho, s.u, params, zeta);
    const LinearSystem mass = assemble_mass_matrix(g, s.u, params, zeta);
    const SparseMatrix G = assemble_grad(g, layout);
    const Vector dp = params.gamma * s.rho.values.array().pow(params.gamma - 1.0);

    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < mom.matrix.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(mom.matrix, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < G.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(G, k); it; ++it)
            t.emplace_back(it.row(), nu + it.col(), zeta * it.value() * dp[it.col()]);
    for (int k = 0; k < mass.matrix.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(mass.matrix, k); it; ++it)
            t.emplace_back(nu + it.row(), nu + it.col(), it.value());
    for (int i = 0; i < g.dimension(); ++i)
        for (int f = 0; f < g.num_faces(i); ++f) {
            const Face& face = g.face(i, f);
            if (!face.interior) continue;
            const int donor = s.u[i].values[f] >= 0.0 ? face.cells[0] : face.cells[1];
            const double q = zeta * face.area * s.rho.values[donor];
            t.emplace_back(nu + face.cells[0], layout.dof(i, f), q / g.cell(face.cells[0]).volume);
            t.emplace_back(nu + face.cells[1], layout.dof(i, f), -q / g.cell(face.cells[1]).volume);
        }
    SparseMatrix A(nu + nc, nu + nc);
    A.setFromTriplets(t.begin(), t.end());
    Vector b(nu + nc);
    b.head(nu) = mom.rhs + zeta * (G * (dp.array() * s.rho.values.array()).matrix());
    b.tail(nc) = mass.rhs + zeta * div_upwind(g, s.rho, s.u).values;
    // The stabilization makes the density block nearly singular; refine once.
    const Vector x = linear_solve(A, b, kind, 1);
    if (!x.allFinite()) throw SolverError("coupled solve produced non-finite values");
    return State{layout.unpack(x.head(nu)), CellField{x.tail(nc)}};
}

// Largest step towards `target` keeping rho above a tenth of its current value.
double positivity_cap(const State& s, const State& target) {
    double cap = 1.0;
    for (int k = 0; k < s.rho.values.size(); ++k) {
        const double d = target.rho.values[k] - s.rho.values[k];
        if (d < 0.0) cap = std::min(cap, 0.9 * s.rho.values[k] / -d);
    }
    return cap;
}

State blend(const State& s, const State& target, double w) {
    return State{(1.0 - w) * s.u + w * target.u, CellField{(1.0 - w) * s.rho.values + w * target.rho.values}};
}

double max_abs(const VelocityField& v) {
    double m = 0.0;
    for (const auto& c : v.components) m = std::max(m, c.values.lpNorm<Eigen::Infinity>());
    return m;
}

}  // namespace

void validate(const SolverConfig& c) {
    const auto& z = c.zeta_schedule;
    if (z.size() < 2 || z.front() != 0.0 || z.back() != 1.0)
        throw ParamError("zeta schedule must start at 0 and end at 1");
    for (std::size_t k = 1; k < z.size(); ++k)
        if (!(z[k] > z[k - 1])) throw ParamError("zeta schedule must be strictly increasing");
    if (!(c.picard_tol > 0.0)) throw ParamError("picard tolerance must be positive");
    if (c.picard_max_iters < 1) throw ParamError("picard iteration limit must be positive");
    if (!(c.relaxation > 0.0 && c.relaxation <= 1.0)) throw ParamError("relaxation must lie in (0, 1]");
}

Vector linear_solve(const SparseMatrix& A, const Vector& b, LinearSolver kind, int refinements) {
    SparseMatrix M = A;
    M.makeCompressed();
    if (kind == LinearSolver::direct_sparse) {
        Eigen::SparseLU<SparseMatrix> lu;
        lu.compute(M);
        if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed: " + lu.lastErrorMessage());
        Vector x = lu.solve(b);
        for (int k = 0; k < refinements; ++k) x += lu.solve(b - M * x);
        if (lu.info() != Eigen::Success) throw SolverError("sparse LU solve failed");
        return x;
    }
    Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>> it;
    it.setTolerance(1e-12);
    it.setMaxIterations(10 * static_cast<int>(A.rows()) + 100);
    it.compute(M);
    if (it.info() != Eigen::Success) throw SolverError("incomplete LU preconditioner failed");
    Vector x = it.solve(b);
    for (int k = 0; k < refinements; ++k) x += it.solve(b - M * x);
    if (it.info() != Eigen::Success) throw SolverError("BiCGSTAB did not converge");
    return x;
}

CellField solve_mass(const MacGrid& g, const VelocityField& u, const SchemeParams& params, double zeta,
                     LinearSolver kind) {
    return solve_mass_tracked(g, u, params, zeta, kind, nullptr);
}

State solve_zeta0(const MacGrid& g, const SchemeParams& params, LinearSolver kind) {
    State s;
    s.rho = CellField{Vector::Constant(g.num_cells(), rho_star(g, params))};
    s.u = solve_momentum(g, s.rho, zero_velocity(g), params, 0.0, kind);
    return s;
}

State picard_step(const MacGrid& g, const State& s, const SchemeParams& params, double zeta, double omega,
                  LinearSolver kind) {
    State r;
    r.rho = solve_mass(g, s.u, params, zeta, kind);
    const VelocityField tmp = solve_momentum(g, r.rho, s.u, params, zeta, kind);
    r.u = (1.0 - omega) * s.u + omega * tmp;
    return r;
}

State coupled_step(const MacGrid& g, const State& s, const SchemeParams& params, double zeta, double omega,
                   LinearSolver kind) {
    const State target = solve_coupled(g, s, params, zeta, kind);
    return blend(s, target, std::min(omega, positivity_cap(s, target)));
}

ResidualNorms residual_norms(const MacGrid& g, const State& s, const SchemeParams& params, double zeta) {
    const double mass_scale = 1.0 + stabilization(g, params) * rho_star(g, params) +
                              zeta * mass_source_cells(g, params).values.lpNorm<Eigen::Infinity>();
    const double mom_scale = 1.0 + max_abs(forcing_faces(g, params, s.rho));
    return {residual_mass(g, s, params, zeta).values.lpNorm<Eigen::Infinity>() / mass_scale,
            max_abs(residual_momentum(g, s, params, zeta)) / mom_scale};
}

SolveReport solve(const MacGrid& g, const SchemeParams& raw, const SolverConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    validate(raw, g.dimension());
    validate(config);
    const SchemeParams params = prepare_forcing(g, raw);
    SolveReport rep;
    rep.cs = stabilization_constant(g, params);
    MassStats stats;
    const LinearSolver kind = config.linear_solver;

    State accepted;
    try {
        accepted = solve_zeta0(g, params, kind);
    } catch (const SolverError& e) {
        rep.message = std::string("zeta = 0: ") + e.what();
        return rep;
    }
    stats.min_rho = rho_star(g, params);
    StageTrace base{0.0, 1, 1.0, true, {}, {}};
    const ResidualNorms r0 = residual_norms(g, accepted, params, 0.0);
    base.mass_residuals.push_back(r0.mass);
    base.momentum_residuals.push_back(r0.momentum);
    base.converged = r0.mass <= config.picard_tol && r0.momentum <= config.picard_tol;
    rep.stages.push_back(base);

    // Picard iterations at fixed zeta from `start`; the trace is appended to the report.
    const auto run_stage = [&](const State& start, double zeta, double omega, State& out) {
        StageTrace tr{zeta, 0, omega, false, {}, {}};
        State s = start;
        try {
            if (config.coupling == Coupling::segregated) s.rho = solve_mass_tracked(g, s.u, params, zeta, kind, &stats);
            for (int it = 0; it <= config.picard_max_iters; ++it) {
                const ResidualNorms r = residual_norms(g, s, params, zeta);
                tr.mass_residuals.push_back(r.mass);
                tr.momentum_residuals.push_back(r.momentum);
                if (!std::isfinite(r.mass) || !std::isfinite(r.momentum)) break;
                if (r.mass <= config.picard_tol && r.momentum <= config.picard_tol) {
                    tr.converged = true;
                    break;
                }
                if (it == config.picard_max_iters) break;
                if (config.coupling == Coupling::segregated) {
                    s.u = (1.0 - omega) * s.u + omega * solve_momentum(g, s.rho, s.u, params, zeta, kind);
                    if (!finite(s.u)) break;
                    s.rho = solve_mass_tracked(g, s.u, params, zeta, kind, &stats);
                } else {
                    // Damped Newton: backtrack until the larger scaled residual decreases.
                    const State target = solve_coupled(g, s, params, zeta, kind);
                    const double merit = std::max(r.mass, r.momentum);
                    double w = std::min(omega, positivity_cap(s, target));
                    State trial = blend(s, target, w);
                    for (int b = 0; b < 12; ++b) {
                        const ResidualNorms rt = residual_norms(g, trial, params, zeta);
                        if (std::max(rt.mass, rt.momentum) < merit) break;
                        w *= 0.5;
                        trial = blend(s, target, w);
                    }
                    s = trial;
                    if (!finite(s.u)) break;
                    // Converged velocities are accepted with the density of the positivity-preserving mass solve.
                    State exact{s.u, solve_mass_tracked(g, s.u, params, zeta, kind, &stats)};
                    const ResidualNorms re = residual_norms(g, exact, params, zeta);
                    if (re.mass <= config.picard_tol && re.momentum <= config.picard_tol) s = exact;
                }
                tr.iterations = it + 1;
            }
        } catch (const SolverError& e) {
            rep.warnings.push_back("zeta = " + std::to_string(zeta) + ", omega = " + std::to_string(omega) + ": " +
                                   e.what());
        }
        rep.stages.push_back(tr);
        if (tr.converged) out = s;
        return tr.converged;
    };

    double zeta_prev = 0.0;
    for (std::size_t k = 1; k < config.zeta_schedule.size(); ++k) {
        const double goal = config.zeta_schedule[k];
        int bisections = 0;
        double target = goal;
        while (zeta_prev < goal) {
            std::vector<double> omegas{config.coupling == Coupling::coupled ? 1.0 : config.relaxation};
            if (config.coupling == Coupling::coupled) omegas.push_back(config.relaxation);
            while (omegas.back() > 0.1) omegas.push_back(std::max(0.1, 0.5 * omegas.back()));
            bool ok = false;
            for (double omega : omegas) {
                State next;
                if ((ok = run_stage(accepted, target, omega, next))) {
                    accepted = next;
                    break;
                }
            }
            if (ok) {
                zeta_prev = target;
                target = goal;
                continue;
            }
            if (bisections == 6) {
                rep.message = "no convergence at zeta = " + std::to_string(target) + " after 6 bisections";
                rep.state = accepted;
                rep.final_residuals = residual_norms(g, accepted, params, zeta_prev);
                rep.wallclock_seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                return rep;
            }
            ++bisections;
            target = 0.5 * (zeta_prev + target);
        }
    }

    rep.state = accepted;
    rep.final_residuals = residual_norms(g, accepted, params, 1.0);
    rep.success = rep.final_residuals.mass <= config.picard_tol && rep.final_residuals.momentum <= config.picard_tol;
    rep.message = rep.success ? "converged" : "final residuals above tolerance";
    const State& s = rep.state;
    const CellField p = pressure(s, params);
    rep.h1_u = h1_norm(g, s.u);
    rep.l2_p = l2_norm(g, p);
    rep.l2gamma_rho = lq_norm(g, s.rho, 2.0 * params.gamma);
    rep.min_rho = s.rho.values.minCoeff();
    rep.total_mass = integral(g, s.rho);
    rep.min_rho_all_solves = stats.min_rho;
    rep.max_mass_defect_all_solves = stats.max_defect;
    rep.mass_solves = stats.count;
    const double scale = std::abs(l2_inner(g, forcing_faces(g, params, s.rho), s.u)) + 1.0;
    rep.energy = energy_report(g, s, params, 10.0 * config.picard_tol * scale, rep.success);
    rep.weak_bv = weak_bv_sum(g, s.rho, s.u, 2.0);
    if (rep.min_rho < config.density_floor_warn)
        rep.warnings.push_back("minimum density " + std::to_string(rep.min_rho) + " below the warning floor");
    rep.wallclock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

void write_report(std::ostream& os, const SolveReport& r) {
    const auto old = os.precision(17);
    os << "status: " << (r.success ? "success" : "failure") << "\n";
    os << "message: " << r.message << "\n";
    os << "cs: " << r.cs << "\n";
    os << "stages: " << r.stages.size() << "\n";
    for (std::size_t k = 0; k < r.stages.size(); ++k) {
        const StageTrace& t = r.stages[k];
        os << "stage." << k << ".zeta: " << t.zeta << "\n";
        os << "stage." << k << ".relaxation: " << t.relaxation << "\n";
        os << "stage." << k << ".iterations: " << t.iterations << "\n";
        os << "stage." << k << ".converged: " << (t.converged ? "true" : "false") << "\n";
        os << "stage." << k << ".mass_residuals:";
        for (double v : t.mass_residuals) os << ' ' << v;
        os << "\nstage." << k << ".momentum_residuals:";
        for (double v : t.momentum_residuals) os << ' ' << v;
        os << "\n";
    }
    os << "residual.mass: " << r.final_residuals.mass << "\n";
    os << "residual.momentum: " << r.final_residuals.momentum << "\n";
    os << "norm.h1_u: " << r.h1_u << "\n";
    os << "norm.l2_p: " << r.l2_p << "\n";
    os << "norm.l2gamma_rho: " << r.l2gamma_rho << "\n";
    os << "min_rho: " << r.min_rho << "\n";
    os << "total_mass: " << r.total_mass << "\n";
    os << "mass_solves: " << r.mass_solves << "\n";
    os << "min_rho_all_solves: " << r.min_rho_all_solves << "\n";
    os << "max_mass_defect_all_solves: " << r.max_mass_defect_all_solves << "\n";
    os << "energy.kinetic_diffusion: " << r.energy.kinetic_diffusion << "\n";
    os << "energy.force_work: " << r.energy.force_work << "\n";
    os << "energy.stabilization_work: " << r.energy.stabilization_work << "\n";
    os << "energy.pressure_work: " << r.energy.pressure_work << "\n";
    os << "energy.satisfied: " << (r.energy.satisfied ? "true" : "false") << "\n";
    os << "weak_bv_beta2: " << r.weak_bv << "\n";
    for (const auto& w : r.warnings) os << "warning: " << w << "\n";
    os << "wallclock_seconds: " << r.wallclock_seconds << "\n";
    os.precision(old);
}

}  // namespace macns
