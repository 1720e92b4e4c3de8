#include "macns/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace macns {

namespace {

template <class T>
std::string str(const T& v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

void validate(const SchemeParams& p, int dimension) {
    if (dimension != 2 && dimension != 3) throw ParamError("dimension must be 2 or 3");
    if (!(p.mu > 0.0)) throw ParamError("mu = " + str(p.mu) + " violates the viscosity constraint mu > 0");
    if (!(p.lambda + 2.0 / dimension * p.mu >= 0.0))
        throw ParamError("lambda = " + str(p.lambda) + " violates the viscosity constraint lambda + (2/d) mu >= 0");
    if (!(p.gamma > 1.0)) throw ParamError("gamma = " + str(p.gamma) + " must exceed 1");
    if (!(p.mass > 0.0)) throw ParamError("mass = " + str(p.mass) + " must be positive");
    if (p.cs && !(*p.cs > 0.0)) throw ParamError("cs = " + str(*p.cs) + " must be positive");
    if (!(p.alpha > 1.0)) throw ParamError("alpha = " + str(p.alpha) + " must exceed 1");
    if (p.forcing.kind == Forcing::Kind::analytic && !p.forcing.function.eval)
        throw ParamError("analytic forcing without a function");
}

double rho_star(const MacGrid& g, const SchemeParams& p) { return p.mass / g.measure(); }

double stabilization_constant(const MacGrid& g, const SchemeParams& p) {
    if (p.cs) return *p.cs;
    const double eta = g.regularity();
    const double bound = p.mu * std::pow(eta, 6) / (p.mass * std::pow(g.diameter(), p.alpha - 1.0));
    return std::min(1.0, 0.9 * bound);
}

double stabilization(const MacGrid& g, const SchemeParams& p) {
    return stabilization_constant(g, p) * std::pow(g.mesh_size(), p.alpha);
}

CellField pressure(const State& s, const SchemeParams& p) {
    return CellField{s.rho.values.array().pow(p.gamma).matrix()};
}

SchemeParams prepare_forcing(const MacGrid& g, const SchemeParams& params) {
    SchemeParams p = params;
    p.forcing.cached_faces.reset();
    p.forcing.cached_source.reset();
    const CellField none = zero_cells(g);
    if (p.forcing.kind != Forcing::Kind::rho_gravity) p.forcing.cached_faces = forcing_faces(g, p, none);
    p.forcing.cached_source = mass_source_cells(g, p);
    return p;
}

VelocityField forcing_faces(const MacGrid& g, const SchemeParams& p, const CellField& rho) {
    const Forcing& f = p.forcing;
    if (f.cached_faces) return *f.cached_faces;
    switch (f.kind) {
        case Forcing::Kind::analytic:
            return project_faces_mean(f.function, g);
        case Forcing::Kind::constant:
        case Forcing::Kind::rho_gravity: {
            VelocityField r = zero_velocity(g);
            const VelocityField rd = dual_density(g, rho);
            for (int i = 0; i < g.dimension(); ++i)
                for (int s = 0; s < g.num_faces(i); ++s)
                    if (g.face(i, s).interior)
                        r[i].values[s] =
                            f.vector[i] * (f.kind == Forcing::Kind::rho_gravity ? rd[i].values[s] : 1.0);
            return r;
        }
        case Forcing::Kind::sampled: {
            if (static_cast<int>(f.cell_values.size()) != g.num_cells())
                throw ParamError("sampled forcing has " + std::to_string(f.cell_values.size()) + " cells, grid has " +
                                 std::to_string(g.num_cells()));
            VelocityField r = zero_velocity(g);
            for (int i = 0; i < g.dimension(); ++i)
                for (int s = 0; s < g.num_faces(i); ++s) {
                    const Face& face = g.face(i, s);
                    if (!face.interior) continue;
                    double m = 0.0;
                    for (int side = 0; side < 2; ++side)
                        m += face.half_volume[side] * f.cell_values[face.cells[side]][i];
                    r[i].values[s] = m / face.dual_volume;
                }
            return r;
        }
    }
    return zero_velocity(g);
}

CellField mass_source_cells(const MacGrid& g, const SchemeParams& p) {
    if (p.forcing.cached_source) return *p.forcing.cached_source;
    if (!p.forcing.mass_source) return zero_cells(g);
    CellField c = project_cells(*p.forcing.mass_source, g);
    const double mean = integral(g, c) / g.measure();
    c.values.array() -= mean;
    return c;
}

CellField residual_mass(const MacGrid& g, const State& s, const SchemeParams& p, double zeta) {
    CellField r = div_upwind(g, s.rho, s.u);
    const CellField src = mass_source_cells(g, p);
    r.values = zeta * (r.values - src.values) +
               stabilization(g, p) * (s.rho.values.array() - rho_star(g, p)).matrix();
    return r;
}

VelocityField residual_momentum(const MacGrid& g, const State& s, const SchemeParams& p, double zeta) {
    const VelocityField conv = convective_div(g, s.rho, s.u);
    const VelocityField gp = grad_faces(g, pressure(s, p));
    const VelocityField lap = laplacian_faces(g, s.u);
    const VelocityField gd = grad_faces(g, div_cells(g, s.u));
    const VelocityField f = forcing_faces(g, p, s.rho);
    VelocityField r = zero_velocity(g);
    for (int i = 0; i < g.dimension(); ++i) {
        r[i].values = zeta * (conv[i].values + gp[i].values) + p.mu * lap[i].values -
                      (p.mu + p.lambda) * gd[i].values - f[i].values;
        clear_boundary(g, r[i]);
    }
    return r;
}

LinearSystem assemble_mass_matrix(const MacGrid& g, const VelocityField& u, const SchemeParams& p, double zeta) {
    const int n = g.num_cells();
    const double stab = stabilization(g, p);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(n * (1 + 2 * g.dimension()));
    for (int k = 0; k < n; ++k) t.emplace_back(k, k, stab);
    for (int i = 0; i < g.dimension(); ++i)
        for (int s = 0; s < g.num_faces(i); ++s) {
            const Face& f = g.face(i, s);
            if (!f.interior) continue;
            const double us = u[i].values[s];
            const int donor = us >= 0.0 ? f.cells[0] : f.cells[1];
            const double q = zeta * f.area * us;
            t.emplace_back(f.cells[0], donor, q / g.cell(f.cells[0]).volume);
            t.emplace_back(f.cells[1], donor, -q / g.cell(f.cells[1]).volume);
        }
    LinearSystem sys;
    sys.matrix.resize(n, n);
    sys.matrix.setFromTriplets(t.begin(), t.end());
    sys.rhs = Vector::Constant(n, stab * rho_star(g, p)) + zeta * mass_source_cells(g, p).values;
    return sys;
}

LinearSystem assemble_momentum_matrix(const MacGrid& g, const DofLayout& layout, const CellField& rho,
                                      const VelocityField& u_frozen, const SchemeParams& p, double zeta) {
    const SparseMatrix D = assemble_div(g, layout);
    const SparseMatrix G = assemble_grad(g, layout);
    SparseMatrix A = p.mu * assemble_laplacian_faces(g, layout) - (p.mu + p.lambda) * (G * D);

    if (zeta != 0.0) {
        const MassFluxes F = mass_fluxes(g, rho, u_frozen);
        std::vector<Eigen::Triplet<double>> t;
        for (int i = 0; i < g.dimension(); ++i) {
            const DualFluxes df = dual_fluxes(g, F, i);
            const auto& pieces = g.pieces(i);
            for (std::size_t q = 0; q < pieces.size(); ++q) {
                const DualPiece& pc = pieces[q];
                if (!pc.interior() || df.flux[q] == 0.0) continue;
                const int a = layout.dof(i, pc.sigma), b = layout.dof(i, pc.neighbor);
                const double half = 0.5 * zeta * df.flux[q];
                for (const auto& [row, sign, face] : {std::tuple{a, 1.0, pc.sigma}, std::tuple{b, -1.0, pc.neighbor}}) {
                    if (row < 0) continue;
                    const double w = sign * half / g.face(i, face).dual_volume;
                    if (a >= 0) t.emplace_back(row, a, w);
                    if (b >= 0) t.emplace_back(row, b, w);
                }
            }
        }
        SparseMatrix C(layout.size(), layout.size());
        C.setFromTriplets(t.begin(), t.end());
        A += C;
    }

    LinearSystem sys;
    sys.matrix = A;
    sys.rhs = layout.pack(forcing_faces(g, p, rho));
    if (zeta != 0.0) sys.rhs -= zeta * (G * pressure(State{u_frozen, rho}, p).values);
    return sys;
}

EnergyReport energy_report(const MacGrid& g, const State& s, const SchemeParams& p, double tolerance,
                           bool converged) {
    EnergyReport r;
    const CellField div = div_cells(g, s.u);
    const double hu = h1_norm(g, s.u);
    r.kinetic_diffusion = p.mu * hu * hu + (p.mu + p.lambda) * l2_inner(g, div, div);
    r.force_work = l2_inner(g, forcing_faces(g, p, s.rho), s.u);
    r.pressure_work = l2_inner(g, pressure(s, p), div);
    // Kinetic energy produced by the stabilization through the dual mass balance.
    const VelocityField rd = dual_density(g, s.rho);
    const double rs = rho_star(g, p);
    double w = 0.0;
    for (int i = 0; i < g.dimension(); ++i)
        for (int f = 0; f < g.num_faces(i); ++f) {
            const Face& face = g.face(i, f);
            if (!face.interior) continue;
            const double v = s.u[i].values[f];
            w += face.dual_volume * (rd[i].values[f] - rs) * v * v;
        }
    r.stabilization_work = 0.5 * stabilization(g, p) * w;
    r.rhs_work = r.force_work + r.stabilization_work;
    r.tolerance = tolerance;
    r.satisfied = r.kinetic_diffusion <= r.rhs_work + tolerance;
    r.meaningful = converged;
    return r;
}

}  // namespace macns
