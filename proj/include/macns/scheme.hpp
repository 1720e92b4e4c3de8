#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "macns/operators.hpp"

namespace macns {

class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Momentum forcing f and the optional mass source used by manufactured solutions.
struct Forcing {
    enum class Kind { constant, rho_gravity, analytic, sampled };
    Kind kind = Kind::constant;
    Point vector{0, 0, 0};
    VectorFunction function;
    /// Per-cell samples of f, used by Kind::sampled.
    std::vector<Point> cell_values;
    /// Right side of the mass equation. Not part of the physical model.
    std::optional<ScalarFunction> mass_source;
    /// Filled by prepare_forcing for density-independent kinds on one grid.
    std::optional<VelocityField> cached_faces;
    std::optional<CellField> cached_source;

    static Forcing none() { return {}; }
    static Forcing constant_vector(const Point& f) { return {Kind::constant, f, {}, {}, {}, {}, {}}; }
    static Forcing rho_gravity(const Point& g) { return {Kind::rho_gravity, g, {}, {}, {}, {}, {}}; }
    static Forcing analytic(VectorFunction f) { return {Kind::analytic, {0, 0, 0}, std::move(f), {}, {}, {}, {}}; }
    static Forcing sampled(std::vector<Point> values) {
        return {Kind::sampled, {0, 0, 0}, {}, std::move(values), {}, {}, {}};
    }
};

struct SchemeParams {
    double gamma = 1.4;
    double mu = 1.0;
    double lambda = 0.0;
    double mass = 1.0;
    /// Empty selects the automatic value of stabilization_constant.
    std::optional<double> cs;
    double alpha = 2.0;
    Forcing forcing;
};

/// Throws ParamError on the first violated constraint.
void validate(const SchemeParams& params, int dimension);

double rho_star(const MacGrid& g, const SchemeParams& params);
/// C_s, or min(1, 0.9 mu eta^6 / (M diam^(alpha-1))) when unset.
double stabilization_constant(const MacGrid& g, const SchemeParams& params);
/// C_s h^alpha.
double stabilization(const MacGrid& g, const SchemeParams& params);

struct State {
    VelocityField u;
    CellField rho;
};

CellField pressure(const State& s, const SchemeParams& params);

/// Copy of params whose density-independent forcing and mass source are evaluated once on g.
SchemeParams prepare_forcing(const MacGrid& g, const SchemeParams& params);

/// P_E f on interior faces. rho is only read by the rho-gravity forcing.
VelocityField forcing_faces(const MacGrid& g, const SchemeParams& params, const CellField& rho);
/// P_M of the mass source with its mean removed so that it integrates to 0; zero without source.
CellField mass_source_cells(const MacGrid& g, const SchemeParams& params);

CellField residual_mass(const MacGrid& g, const State& s, const SchemeParams& params, double zeta);
VelocityField residual_momentum(const MacGrid& g, const State& s, const SchemeParams& params, double zeta);

struct LinearSystem {
    SparseMatrix matrix;
    Vector rhs;
};

/// Row K: zeta div_upwind as a linear function of rho plus C_s h^alpha rho_K.
LinearSystem assemble_mass_matrix(const MacGrid& g, const VelocityField& u, const SchemeParams& params,
                                  double zeta);
/// Oseen linearization on DofLayout unknowns: mass fluxes frozen at (rho, u_frozen), pressure on the right.
LinearSystem assemble_momentum_matrix(const MacGrid& g, const DofLayout& layout, const CellField& rho,
                                      const VelocityField& u_frozen, const SchemeParams& params, double zeta);

/// Discrete energy balance of a solution: kinetic_diffusion = mu |u|_1^2 + (mu + lambda) |div u|^2
/// and rhs_work = force_work + stabilization_work. pressure_work = int p div u is <= 0 at a solution.
struct EnergyReport {
    double kinetic_diffusion = 0.0;
    double force_work = 0.0;
    double stabilization_work = 0.0;
    double pressure_work = 0.0;
    double rhs_work = 0.0;
    double tolerance = 0.0;
    bool satisfied = false;
    /// False when the state was not declared a converged solution; satisfied is then not meaningful.
    bool meaningful = true;
};

EnergyReport energy_report(const MacGrid& g, const State& s, const SchemeParams& params, double tolerance,
                           bool converged = true);

}  // namespace macns
