#include "macns/operators.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <Eigen/SparseCholesky>

namespace macns {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Derivative along +e_axis on a piece; exterior values of u enter as stored.
double piece_derivative(const DualPiece& p, const Vector& u) {
    if (p.interior()) return (u[p.neighbor] - u[p.sigma]) / p.dist;
    return -p.side * u[p.sigma] / p.dist;
}

// Distance used by the primal Laplacian across a face: centre to centre, or centre to face.
double primal_distance(const MacGrid& g, const Face& f) {
    const int i = f.direction;
    double d = 0.0;
    for (int c : f.cells)
        if (c >= 0) d += 0.5 * g.cell(c).width[i];
    return d;
}

}  // namespace

std::vector<std::array<int, 2>> curl_pairs(int dimension) {
    if (dimension == 2) return {{0, 1}};
    return {{1, 2}, {2, 0}, {0, 1}};
}

CellField div_cells(const MacGrid& g, const VelocityField& u) {
    CellField r = zero_cells(g);
    for (int k = 0; k < g.num_cells(); ++k) {
        const Cell& c = g.cell(k);
        double s = 0.0;
        for (int i = 0; i < g.dimension(); ++i) {
            const double area = c.volume / c.width[i];
            s += area * (u[i].values[c.faces[i][1]] - u[i].values[c.faces[i][0]]);
        }
        r.values[k] = s / c.volume;
    }
    return r;
}

VelocityField grad_faces(const MacGrid& g, const CellField& p) {
    VelocityField r = zero_velocity(g);
    for (int i = 0; i < g.dimension(); ++i)
        for (int s = 0; s < g.num_faces(i); ++s) {
            const Face& f = g.face(i, s);
            if (!f.interior) continue;
            r[i].values[s] = f.area / f.dual_volume * (p.values[f.cells[1]] - p.values[f.cells[0]]);
        }
    return r;
}

VelocityField grad_faces_ext(const MacGrid& g, const CellField& w) {
    VelocityField r = zero_velocity(g, false);
    for (int i = 0; i < g.dimension(); ++i)
        for (int s = 0; s < g.num_faces(i); ++s) {
            const Face& f = g.face(i, s);
            const double lo = f.cells[0] >= 0 ? w.values[f.cells[0]] : 0.0;
            const double hi = f.cells[1] >= 0 ? w.values[f.cells[1]] : 0.0;
            r[i].values[s] = f.area / f.dual_volume * (hi - lo);
        }
    return r;
}

VelocityField laplacian_faces(const MacGrid& g, const VelocityField& u) {
    VelocityField r = zero_velocity(g);
    for (int i = 0; i < g.dimension(); ++i) {
        const Vector& v = u[i].values;
        Vector& out = r[i].values;
        for (const DualPiece& p : g.pieces(i)) {
            const double t = p.area / p.dist;
            if (p.interior()) {
                out[p.sigma] += t * (v[p.sigma] - v[p.neighbor]);
                out[p.neighbor] += t * (v[p.neighbor] - v[p.sigma]);
            } else {
                out[p.sigma] += t * v[p.sigma];
            }
        }
        for (int s = 0; s < g.num_faces(i); ++s) {
            const Face& f = g.face(i, s);
            out[s] = f.interior ? out[s] / f.dual_volume : 0.0;
        }
    }
    return r;
}

SparseMatrix assemble_laplacian_cells(const MacGrid& g) {
    Triplets t;
    for (int i = 0; i < g.dimension(); ++i)
        for (const Face& f : g.faces(i)) {
            const double tr = f.area / primal_distance(g, f);
            const int a = f.cells[0], b = f.cells[1];
            if (a >= 0) t.emplace_back(a, a, tr);
            if (b >= 0) t.emplace_back(b, b, tr);
            if (a >= 0 && b >= 0) {
                t.emplace_back(a, b, -tr);
                t.emplace_back(b, a, -tr);
            }
        }
    SparseMatrix T(g.num_cells(), g.num_cells());
    T.setFromTriplets(t.begin(), t.end());
    return T;
}

CellField laplacian_cells(const MacGrid& g, const CellField& w) {
    CellField r{assemble_laplacian_cells(g) * w.values};
    for (int k = 0; k < g.num_cells(); ++k) r.values[k] /= g.cell(k).volume;
    return r;
}

CellField solve_primal_poisson(const MacGrid& g, const CellField& rho, double* residual) {
    const SparseMatrix T = assemble_laplacian_cells(g);
    Vector b(g.num_cells());
    for (int k = 0; k < g.num_cells(); ++k) b[k] = g.cell(k).volume * rho.values[k];
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(T);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("primal Laplacian factorization failed");
    CellField w{ldlt.solve(b)};
    const CellField lw = laplacian_cells(g, w);
    const double res = (lw.values - rho.values).lpNorm<Eigen::Infinity>();
    if (residual) *residual = res;
    if (!std::isfinite(res)) throw std::runtime_error("primal Poisson solve produced a non-finite residual");
    return w;
}

PieceField grad_full(const MacGrid& g, const VelocityField& u) {
    PieceField r;
    for (int i = 0; i < g.dimension(); ++i) {
        const auto& pieces = g.pieces(i);
        Vector d(pieces.size());
        for (std::size_t p = 0; p < pieces.size(); ++p) d[p] = piece_derivative(pieces[p], u[i].values);
        r.components.push_back(std::move(d));
    }
    return r;
}

double integrate_product(const MacGrid& g, const PieceField& a, const PieceField& b) {
    double s = 0.0;
    for (int i = 0; i < g.dimension(); ++i) {
        const auto& pieces = g.pieces(i);
        for (std::size_t p = 0; p < pieces.size(); ++p)
            s += pieces[p].area * pieces[p].dist * a.components[i][p] * b.components[i][p];
    }
    return s;
}

CurlField curl_faces(const MacGrid& g, const VelocityField& v) {
    const int nq = 4 * g.num_cells();
    CurlField r;
    r.measure.resize(nq);
    for (int k = 0; k < g.num_cells(); ++k)
        for (int q = 0; q < 4; ++q) r.measure[4 * k + q] = 0.25 * g.cell(k).volume;
    for (const auto& [a, b] : curl_pairs(g.dimension())) {
        Vector c(nq);
        for (int k = 0; k < g.num_cells(); ++k) {
            const Cell& cell = g.cell(k);
            for (int sa = 0; sa < 2; ++sa)
                for (int sb = 0; sb < 2; ++sb) {
                    const int sigma = cell.faces[a][sa];
                    const int tau = cell.faces[b][sb];
                    const int pa = g.tangent_piece(a, sigma, b, sb ? 1 : -1, sa ? 0 : 1);
                    const int pb = g.tangent_piece(b, tau, a, sa ? 1 : -1, sb ? 0 : 1);
                    const double db_va = piece_derivative(g.pieces(a)[pa], v[a].values);
                    const double da_vb = piece_derivative(g.pieces(b)[pb], v[b].values);
                    c[4 * k + 2 * sa + sb] = da_vb - db_va;
                }
        }
        r.components.push_back(std::move(c));
    }
    return r;
}

double integrate_product(const CurlField& a, const CurlField& b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.components.size(); ++c)
        s += (a.measure.array() * a.components[c].array() * b.components[c].array()).sum();
    return s;
}

double h1_inner(const MacGrid& g, const VelocityField& u, const VelocityField& v) {
    double s = 0.0;
    for (int i = 0; i < g.dimension(); ++i)
        for (const DualPiece& p : g.pieces(i)) {
            const double t = p.area / p.dist;
            if (p.interior())
                s += t * (u[i].values[p.sigma] - u[i].values[p.neighbor]) *
                     (v[i].values[p.sigma] - v[i].values[p.neighbor]);
            else
                s += t * u[i].values[p.sigma] * v[i].values[p.sigma];
        }
    return s;
}

double h1_norm(const MacGrid& g, const VelocityField& u) { return std::sqrt(h1_inner(g, u, u)); }

MassFluxes mass_fluxes(const MacGrid& g, const CellField& rho, const VelocityField& u) {
    MassFluxes F;
    for (int i = 0; i < g.dimension(); ++i) {
        F.flux[i] = Vector::Zero(g.num_faces(i));
        F.donor[i].assign(g.num_faces(i), -1);
        for (int s = 0; s < g.num_faces(i); ++s) {
            const Face& f = g.face(i, s);
            if (!f.interior) continue;
            const double us = u[i].values[s];
            // u_{K,s} >= 0 for the lower cell K selects K, ties included.
            const int donor = us >= 0.0 ? f.cells[0] : f.cells[1];
            F.donor[i][s] = donor;
            F.flux[i][s] = f.area * rho.values[donor] * us;
        }
    }
    return F;
}

CellField div_upwind(const MacGrid& g, const MassFluxes& F) {
    CellField r = zero_cells(g);
    for (int k = 0; k < g.num_cells(); ++k) {
        const Cell& c = g.cell(k);
        double s = 0.0;
        for (int i = 0; i < g.dimension(); ++i) s += F.flux[i][c.faces[i][1]] - F.flux[i][c.faces[i][0]];
        r.values[k] = s / c.volume;
    }
    return r;
}

CellField div_upwind(const MacGrid& g, const CellField& rho, const VelocityField& u) {
    return div_upwind(g, mass_fluxes(g, rho, u));
}

DualFluxes dual_fluxes(const MacGrid& g, const MassFluxes& F, int direction) {
    const int i = direction;
    const auto& pieces = g.pieces(i);
    DualFluxes r{i, Vector::Zero(pieces.size())};
    for (std::size_t p = 0; p < pieces.size(); ++p) {
        const DualPiece& pc = pieces[p];
        if (!pc.interior()) continue;
        const Cell& c = g.cell(pc.cell);
        if (pc.axis == i)
            r.flux[p] = 0.5 * (F.flux[i][c.faces[i][0]] + F.flux[i][c.faces[i][1]]);
        else
            r.flux[p] = 0.5 * F.flux[pc.axis][c.faces[pc.axis][1]];
    }
    return r;
}

FaceField dual_flux_balance(const MacGrid& g, const DualFluxes& F) {
    FaceField r = zero_faces(g, F.direction, false);
    const auto& pieces = g.pieces(F.direction);
    for (std::size_t p = 0; p < pieces.size(); ++p) {
        if (!pieces[p].interior()) continue;
        r.values[pieces[p].sigma] += F.flux[p];
        r.values[pieces[p].neighbor] -= F.flux[p];
    }
    return r;
}

FaceField dual_density(const MacGrid& g, const CellField& rho, int direction) {
    FaceField r = zero_faces(g, direction, false);
    for (int s = 0; s < g.num_faces(direction); ++s) {
        const Face& f = g.face(direction, s);
        double m = 0.0;
        for (int side = 0; side < 2; ++side)
            if (f.cells[side] >= 0) m += f.half_volume[side] * rho.values[f.cells[side]];
        r.values[s] = m / f.dual_volume;
    }
    return r;
}

VelocityField dual_density(const MacGrid& g, const CellField& rho) {
    VelocityField r;
    for (int i = 0; i < g.dimension(); ++i) r.components.push_back(dual_density(g, rho, i));
    return r;
}

VelocityField convective_div(const MacGrid& g, const CellField& rho, const VelocityField& u) {
    const MassFluxes F = mass_fluxes(g, rho, u);
    VelocityField r = zero_velocity(g);
    for (int i = 0; i < g.dimension(); ++i) {
        const DualFluxes D = dual_fluxes(g, F, i);
        const auto& pieces = g.pieces(i);
        const Vector& v = u[i].values;
        Vector& out = r[i].values;
        for (std::size_t p = 0; p < pieces.size(); ++p) {
            const DualPiece& pc = pieces[p];
            if (!pc.interior()) continue;
            const double flux = D.flux[p] * 0.5 * (v[pc.sigma] + v[pc.neighbor]);
            out[pc.sigma] += flux;
            out[pc.neighbor] -= flux;
        }
        for (int s = 0; s < g.num_faces(i); ++s) {
            const Face& f = g.face(i, s);
            out[s] = f.interior ? out[s] / f.dual_volume : 0.0;
        }
    }
    return r;
}

double weak_bv_sum(const MacGrid& g, const CellField& rho, const VelocityField& u, double beta) {
    if (beta < 1.0) throw std::domain_error("weak BV exponent must be at least 1");
    double s = 0.0;
    for (int i = 0; i < g.dimension(); ++i)
        for (int f = 0; f < g.num_faces(i); ++f) {
            const Face& face = g.face(i, f);
            if (!face.interior) continue;
            const double rk = rho.values[face.cells[0]], rl = rho.values[face.cells[1]];
            if ((beta < 2.0 && (rk <= 0.0 || rl <= 0.0)) || (beta > 2.0 && (rk < 0.0 || rl < 0.0)))
                throw std::domain_error("weak BV sum needs a positive density");
            const double w = beta == 2.0 ? 1.0 : std::min(std::pow(rk, beta - 2.0), std::pow(rl, beta - 2.0));
            const double jump = rl - rk;
            s += face.area * w * std::abs(u[i].values[f]) * jump * jump;
        }
    return s;
}

CellField effective_viscous_flux(const MacGrid& g, const CellField& p, const VelocityField& u, double mu,
                                 double lambda) {
    CellField r{p.values - (2.0 * mu + lambda) * div_cells(g, u).values};
    return r;
}

SparseMatrix assemble_div(const MacGrid& g, const DofLayout& layout) {
    Triplets t;
    for (int k = 0; k < g.num_cells(); ++k) {
        const Cell& c = g.cell(k);
        for (int i = 0; i < g.dimension(); ++i) {
            const double w = 1.0 / c.width[i];
            for (int side = 0; side < 2; ++side) {
                const int d = layout.dof(i, c.faces[i][side]);
                if (d >= 0) t.emplace_back(k, d, side ? w : -w);
            }
        }
    }
    SparseMatrix D(g.num_cells(), layout.size());
    D.setFromTriplets(t.begin(), t.end());
    return D;
}

SparseMatrix assemble_grad(const MacGrid& g, const DofLayout& layout) {
    Triplets t;
    for (int i = 0; i < g.dimension(); ++i)
        for (int s = 0; s < g.num_faces(i); ++s) {
            const int d = layout.dof(i, s);
            if (d < 0) continue;
            const Face& f = g.face(i, s);
            const double w = f.area / f.dual_volume;
            t.emplace_back(d, f.cells[1], w);
            t.emplace_back(d, f.cells[0], -w);
        }
    SparseMatrix G(layout.size(), g.num_cells());
    G.setFromTriplets(t.begin(), t.end());
    return G;
}

SparseMatrix assemble_laplacian_faces(const MacGrid& g, const DofLayout& layout) {
    Triplets t;
    for (int i = 0; i < g.dimension(); ++i)
        for (const DualPiece& p : g.pieces(i)) {
            const double tr = p.area / p.dist;
            const int a = layout.dof(i, p.sigma);
            const int b = p.interior() ? layout.dof(i, p.neighbor) : -1;
            if (a >= 0) {
                const double w = tr / g.face(i, p.sigma).dual_volume;
                t.emplace_back(a, a, w);
                if (b >= 0) t.emplace_back(a, b, -w);
            }
            if (b >= 0) {
                const double w = tr / g.face(i, p.neighbor).dual_volume;
                t.emplace_back(b, b, w);
                if (a >= 0) t.emplace_back(b, a, -w);
            }
        }
    SparseMatrix L(layout.size(), layout.size());
    L.setFromTriplets(t.begin(), t.end());
    return L;
}

void write_coo(std::ostream& os, const SparseMatrix& A) {
    const auto old = os.precision(17);
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(A, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    os.precision(old);
}

}  // namespace macns
