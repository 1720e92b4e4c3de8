// Acceptance gate: one PASS/FAIL line per criterion. `acceptance --criterion N` runs one criterion,
// no argument runs all ten. Exit status is 0 iff every selected criterion passes.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "macns/diagnostics.hpp"
#include "support.hpp"

using namespace macns;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

SchemeParams gravity_params() {
    SchemeParams p;
    p.gamma = 1.4;
    p.mu = 0.1;
    p.lambda = 0.0;
    p.mass = 1.0;
    p.forcing = Forcing::constant_vector({0.0, -1.0, 0.0});
    return p;
}

SchemeParams smoke3d_params() {
    SchemeParams p;
    p.gamma = 3.5;
    p.mu = 0.1;
    p.forcing = Forcing::constant_vector({0.0, 0.0, -1.0});
    return p;
}

MacGrid square(int n) { return build_grid(DomainSpec::unit_square(), Refinement::uniform(n)); }

// Identity trials over the fixture family plus a finer L-shape, computed once per process.
const std::vector<std::pair<std::string, IdentityReport>>& identity_reports() {
    static const auto reports = [] {
        std::vector<std::pair<std::string, IdentityReport>> out;
        auto family = fixtures::grid_family();
        family.push_back({"lshape-16", build_grid(DomainSpec::l_shape(), Refinement::uniform({16, 8, 1}))});
        std::uint64_t seed = 2024;
        for (const auto& [name, g] : family) out.emplace_back(name, run_identity_suite(g, 50, seed++));
        return out;
    }();
    return reports;
}

Outcome identity_criterion(const std::vector<std::string>& names, double tol, bool absolute) {
    Outcome o{true, ""};
    std::string worst_grid;
    double worst = 0.0;
    for (const auto& [grid, rep] : identity_reports()) {
        for (const auto& name : names) {
            const IdentityDefect& d = rep.at(name);
            const double v = absolute ? d.max_abs : d.max_rel;
            if (v > tol) {
                o.pass = false;
                o.detail += " " + grid + ":" + name + "=" + fmt(v);
            }
            if (v >= worst) {
                worst = v;
                worst_grid = grid;
            }
        }
    }
    o.detail = std::to_string(identity_reports().size()) + " grids, worst " + fmt(worst) + " on " + worst_grid +
               " (tol " + fmt(tol) + ")" + (o.pass ? "" : "; above tol:" + o.detail);
    return o;
}

struct Run {
    MacGrid grid;
    SchemeParams params;
    SolveReport report;
};

const Run& gravity_run(int n) {
    static std::map<int, Run> runs;
    auto it = runs.find(n);
    if (it == runs.end()) {
        MacGrid g = square(n);
        SchemeParams p = gravity_params();
        SolveReport r = solve(g, p);
        it = runs.emplace(n, Run{std::move(g), p, std::move(r)}).first;
    }
    return it->second;
}

const Run& smoke3d_run() {
    static const Run run = [] {
        MacGrid g = build_grid(DomainSpec::unit_cube(), Refinement::uniform(8));
        const SchemeParams p = smoke3d_params();
        SolveReport r = solve(g, p);
        return Run{std::move(g), p, std::move(r)};
    }();
    return run;
}

// Positivity and exact mass over the whole solve path of one run.
Outcome mass_invariants(const Run& r) {
    const SolveReport& s = r.report;
    const double defect = std::abs(s.total_mass - r.params.mass) / r.params.mass;
    const bool ok = s.success && s.min_rho > 0.0 && s.min_rho_all_solves > 0.0 && defect <= 1e-12 &&
                    s.max_mass_defect_all_solves <= 1e-12;
    return {ok, "min rho " + fmt(s.min_rho_all_solves) + " over " + std::to_string(s.mass_solves) +
                    " mass solves, mass defect " + fmt(std::max(defect, s.max_mass_defect_all_solves))};
}

Outcome energy_inequality(const Run& r) {
    const EnergyReport& e = r.report.energy;
    const double scale = 1.0 + std::abs(e.force_work) + std::abs(e.stabilization_work);
    const bool ok = r.report.success && e.kinetic_diffusion <= e.rhs_work + 1e-8 * scale;
    return {ok, "lhs " + fmt(e.kinetic_diffusion) + " <= rhs " + fmt(e.rhs_work) + " (force " + fmt(e.force_work) +
                    ", stabilization " + fmt(e.stabilization_work) + ")"};
}

// Per dual cell: sum of dual fluxes against |D_K,s| div_K + |D_L,s| div_L, relative to the
// absolute primal flux that enters those divergences.
Outcome diamond_balance(const Run& r) {
    const MacGrid& g = r.grid;
    const State& s = r.report.state;
    const MassFluxes F = mass_fluxes(g, s.rho, s.u);
    const CellField div = div_upwind(g, F);
    Vector abs_flux = Vector::Zero(g.num_cells());
    for (int i = 0; i < g.dimension(); ++i)
        for (int f = 0; f < g.num_faces(i); ++f) {
            const Face& face = g.face(i, f);
            if (!face.interior) continue;
            for (int side = 0; side < 2; ++side) abs_flux[face.cells[side]] += std::abs(F.flux[i][f]);
        }
    double worst = 0.0;
    for (int i = 0; i < g.dimension(); ++i) {
        const FaceField b = dual_flux_balance(g, dual_fluxes(g, F, i));
        for (int f = 0; f < g.num_faces(i); ++f) {
            const Face& face = g.face(i, f);
            if (!face.interior) continue;
            const int K = face.cells[0], L = face.cells[1];
            const double e = face.half_volume[0] * div.values[K] + face.half_volume[1] * div.values[L];
            const double scale = face.half_volume[0] * abs_flux[K] / g.cell(K).volume +
                                 face.half_volume[1] * abs_flux[L] / g.cell(L).volume;
            if (scale > 0.0) worst = std::max(worst, std::abs(b.values[f] - e) / scale);
        }
    }
    return {r.report.success && worst <= 1e-11, "max relative defect " + fmt(worst)};
}

Outcome all_of(std::vector<std::pair<std::string, Outcome>> parts) {
    Outcome o{true, ""};
    for (const auto& [name, p] : parts) {
        o.pass = o.pass && p.pass;
        o.detail += (o.detail.empty() ? "" : "; ") + name + ": " + (p.pass ? "" : "FAILED ") + p.detail;
    }
    return o;
}

Outcome criterion1() { return identity_criterion({"duality"}, 1e-12, false); }

Outcome criterion2() { return identity_criterion({"hodge"}, 1e-11, false); }

Outcome criterion3() {
    const Outcome div = identity_criterion({"div_poisson"}, 1e-10, false);
    const Outcome curl = identity_criterion({"curl_grad"}, 1e-12, false);
    return all_of({{"div", div}, {"curl", curl}});
}

Outcome criterion4() { return identity_criterion({"fortin"}, 1e-9, true); }

Outcome criterion5() {
    // Randomized-velocity mass solves against the lower and upper density bounds.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> amp(0.1, 500.0);
    const auto family = fixtures::grid_family();
    double worst_ratio = std::numeric_limits<double>::infinity();
    bool bounds = true;
    for (int trial = 0; trial < 20; ++trial) {
        const MacGrid& g = family[trial % family.size()].grid;
        SchemeParams p;
        p.mass = 0.5 + trial;
        const VelocityField u = amp(rng) * fixtures::random_velocity(g, rng);
        const CellField rho = solve_mass(g, u, p, 1.0);
        double min_vol = std::numeric_limits<double>::infinity();
        for (const auto& c : g.cells()) min_vol = std::min(min_vol, c.volume);
        const double stab = stabilization(g, p);
        for (int k = 0; k < g.num_cells(); ++k) {
            double flux = 0.0;
            for (int i = 0; i < g.dimension(); ++i)
                for (int side = 0; side < 2; ++side) {
                    const int f = g.cell(k).faces[i][side];
                    if (f >= 0 && g.face(i, f).interior) flux += g.face(i, f).area * std::abs(u[i].values[f]);
                }
            const double lower = stab * min_vol * rho_star(g, p) / (stab * g.measure() + flux);
            worst_ratio = std::min(worst_ratio, rho.values[k] / lower);
            bounds = bounds && rho.values[k] >= lower && rho.values[k] <= p.mass / min_vol;
        }
        bounds = bounds && std::abs(integral(g, rho) - p.mass) <= 1e-12 * p.mass;
    }
    return all_of({{"gravity 16", mass_invariants(gravity_run(16))},
                   {"gravity 32", mass_invariants(gravity_run(32))},
                   {"3D smoke", mass_invariants(smoke3d_run())},
                   {"bounds", {bounds, "20 random solves, min rho / lower bound " + fmt(worst_ratio)}}});
}

Outcome criterion6() {
    Outcome o{true, ""};
    double worst = 0.0;
    auto family = fixtures::grid_family();
    family.push_back({"square-16", square(16)});
    for (const auto& [name, g] : family) {
        SchemeParams p = gravity_params();
        if (g.dimension() == 3) p = smoke3d_params();
        p.lambda = 0.3;
        const State s = solve_zeta0(g, p);
        for (int k = 0; k < g.num_cells(); ++k) o.pass = o.pass && s.rho.values[k] == rho_star(g, p);
        const double r = residual_norms(g, s, p, 0.0).momentum;
        worst = std::max(worst, r);
        o.pass = o.pass && r <= 1e-12;
    }
    o.detail = std::to_string(family.size()) + " grids, rho == rho* exactly: " + (o.pass ? "yes" : "no") +
               ", max scaled momentum residual " + fmt(worst);
    return o;
}

Outcome criterion7() {
    return all_of({{"16x16", energy_inequality(gravity_run(16))}, {"32x32", energy_inequality(gravity_run(32))}});
}

Outcome criterion8() {
    return all_of({{"16x16", diamond_balance(gravity_run(16))},
                   {"32x32", diamond_balance(gravity_run(32))},
                   {"3D smoke", diamond_balance(smoke3d_run())}});
}

// Norms converging to a nonzero limit must stay within 10% in both directions; norms of the
// velocity and weak-BV sum decay towards the hydrostatic rest state and must not grow by 10%.
Outcome criterion9() {
    const StabilityTable t = probe_stability_constants(DomainSpec::unit_square(), {8, 16, 32}, gravity_params(), {});
    bool solved = t.rows.size() == 3;
    for (const auto& r : t.rows) solved = solved && r.solved;
    if (!solved) return {false, "a refinement level did not converge"};
    const StabilityRow& a = t.rows[1];
    const StabilityRow& b = t.rows[2];
    const auto change = [](double x, double y) { return (y - x) / std::abs(x); };
    const double dp = change(a.l2_p, b.l2_p), drho = change(a.l2gamma_rho, b.l2gamma_rho);
    const double du = change(a.h1_u, b.h1_u), dbv = change(a.weak_bv_2, b.weak_bv_2);
    const bool ok = std::abs(dp) < 0.1 && std::abs(drho) < 0.1 && du < 0.1 && dbv < 0.1 && t.bounded;
    return {ok, "16->32 relative change: |p| " + fmt(dp) + ", |rho|_2g " + fmt(drho) + ", |u|_1 " + fmt(du) +
                    " (" + fmt(a.h1_u) + "->" + fmt(b.h1_u) + "), weak_bv " + fmt(dbv) + " (" + fmt(a.weak_bv_2) +
                    "->" + fmt(b.weak_bv_2) + "), max growth " + fmt(t.max_growth)};
}

Outcome criterion10() {
    StudySpec spec;
    spec.mode = StudyMode::reference;
    spec.domain = DomainSpec::unit_square();
    spec.base_cells = {8, 8, 0};
    spec.levels = 3;
    const ConvergenceStudy st = run_convergence_study(spec, gravity_params(), {});
    bool decreasing = st.complete && st.levels.size() == 3;
    std::string eu, er;
    for (std::size_t k = 0; k < st.levels.size(); ++k) {
        eu += (k ? "," : "") + fmt(st.levels[k].err_u_l2);
        er += (k ? "," : "") + fmt(st.levels[k].err_rho_l2);
        if (k > 0)
            decreasing = decreasing && st.levels[k].err_u_l2 < st.levels[k - 1].err_u_l2 &&
                         st.levels[k].err_rho_l2 < st.levels[k - 1].err_rho_l2;
    }
    const Run& r = smoke3d_run();
    return all_of({{"study 8/16/32 vs 64", {decreasing, "u L2 " + eu + "; rho L2 " + er}},
                   {"3D 8^3 converged", {r.report.success, r.report.message}},
                   {"3D mass", mass_invariants(r)},
                   {"3D energy", energy_inequality(r)},
                   {"3D diamond", diamond_balance(r)}});
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                         criterion5, criterion6, criterion7, criterion8,
                                                         criterion9, criterion10};
    std::vector<int> selected;
    for (int k = 1; k < argc; ++k) {
        if (std::strcmp(argv[k], "--criterion") == 0 && k + 1 < argc) {
            selected.push_back(std::atoi(argv[++k]));
        } else {
            std::cerr << "usage: acceptance [--criterion N]...\n";
            return 2;
        }
    }
    if (selected.empty())
        for (int k = 1; k <= 10; ++k) selected.push_back(k);
    bool all = true;
    for (int k : selected) {
        if (k < 1 || k > 10) {
            std::cerr << "no criterion " << k << "\n";
            return 2;
        }
        Outcome o;
        try {
            o = criteria[k - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
