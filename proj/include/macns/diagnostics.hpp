#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "macns/solver.hpp"

namespace macns {

struct IdentityDefect {
    std::string name;
    double max_abs = 0.0;
    double max_rel = 0.0;
    int trials = 0;
};

struct IdentityReport {
    std::string grid;
    std::uint64_t seed = 0;
    std::vector<IdentityDefect> defects;

    const IdentityDefect& at(const std::string& name) const;
};

/// Compactly supported field whose support is a box of grid lines inside the domain, with its divergence.
struct CompactField {
    VectorFunction v;
    ScalarFunction div;
};
CompactField random_compact_field(const MacGrid& g, std::mt19937_64& rng);

/// Defects of the discrete identities on pseudorandom fields. Identity names:
/// duality, hodge, curl_grad, div_poisson, fortin, h1_consistency, diamond_balance.
IdentityReport run_identity_suite(const MacGrid& g, int trials, std::uint64_t seed);

/// Acceptance threshold of an identity. fortin is checked on max_abs, every other identity on max_rel.
double identity_tolerance(const std::string& name);
bool within_tolerance(const IdentityDefect& d);
bool all_within_tolerance(const IdentityReport& r);

void write_report(std::ostream& os, const IdentityReport& r);

/// Manufactured solution with the sources that make it exact for the continuous problem.
struct MmsProblem {
    std::string name;
    VectorFunction u;
    ScalarFunction rho;
    VectorFunction f;
    /// Right side of the mass equation; empty when the exact state needs none.
    std::optional<ScalarFunction> g;
};

/// Presets: "rest" (u = 0, rho = rho*, any domain) and "trig" (2D unit square, divergence free
/// u from a squared-sine stream function, rho = c (1 + 0.1 sin(pi x) sin(pi y)) of mass M).
/// Throws ParamError for an unknown name or an unsupported domain.
MmsProblem mms_preset(const std::string& name, const SchemeParams& params, const DomainSpec& domain);

struct ConvergenceLevel {
    int level = 0;
    double h = 0.0;
    double err_u_l2 = 0.0;
    double err_u_h1 = 0.0;
    double err_rho_l2 = 0.0;
    double err_p_l2 = 0.0;
    double order_u = 0.0;
    double order_rho = 0.0;
    bool solved = false;
    std::string note;
};

struct ConvergenceStudy {
    std::string mode;
    std::vector<ConvergenceLevel> levels;
    bool complete = false;
};

enum class StudyMode { mms, reference };

struct StudySpec {
    StudyMode mode = StudyMode::reference;
    DomainSpec domain;
    /// Cells per axis of the coarsest level; level k uses base * 2^k.
    std::array<int, 3> base_cells{8, 8, 8};
    int levels = 3;
    /// Used in mms mode.
    std::optional<MmsProblem> problem;
};

/// Reference mode compares each level with the solution on one further refinement, transferred
/// to the coarse level by cell means (rho, p) and face means (u).
ConvergenceStudy run_convergence_study(const StudySpec& spec, SchemeParams params, const SolverConfig& config);
/// `level,h,err_u_l2,err_u_h1,err_rho_l2,err_p_l2,order_u,order_rho`.
void write_csv(std::ostream& os, const ConvergenceStudy& s);

struct StabilityRow {
    int cells = 0;
    double h = 0.0;
    bool solved = false;
    double h1_u = 0.0;
    double l2_p = 0.0;
    double l2gamma_rho = 0.0;
    double weak_bv_2 = 0.0;
    double weak_bv_gamma = 0.0;
    /// |u|_{L^4} (2D) or |u|_{L^6} (3D) over |u|_{1,E,0}; 0 when u = 0.
    double sobolev_ratio = 0.0;
};

struct StabilityTable {
    std::vector<StabilityRow> rows;
    /// Largest relative increase of a probed quantity between the two finest levels; decrease counts as 0.
    double max_growth = 0.0;
    /// Largest relative change in either direction over the same pair.
    double max_variation = 0.0;
    bool bounded = false;
};

StabilityTable probe_stability_constants(const DomainSpec& domain, const std::vector<int>& cells,
                                         const SchemeParams& params, const SolverConfig& config);
void write_csv(std::ostream& os, const StabilityTable& t);

}  // namespace macns
