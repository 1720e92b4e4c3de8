#pragma once

#include <iosfwd>

#include <Eigen/SparseCore>

#include "macns/fields.hpp"

namespace macns {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Upwind mass fluxes. flux[i][s] is the flux through face s of E^(i) in the +e_i direction,
/// so F_{K,s} = +flux for the lower cell K and -flux for the upper one.
struct MassFluxes {
    std::array<Vector, 3> flux;
    /// Donor cell of each face, -1 on exterior faces.
    std::array<std::vector<int>, 3> donor;
};

/// Dual fluxes of one direction, one entry per piece of g.pieces(direction), oriented from
/// D_sigma towards the neighbour (+e_axis). Zero on boundary pieces.
struct DualFluxes {
    int direction = 0;
    Vector flux;
};

/// Piecewise constant values on the D_eps boxes: components[i][p] lives on piece p of g.pieces(i).
struct PieceField {
    std::vector<Vector> components;
};

/// Curl on the quadrant partition. Quadrant q = 4 * cell + 2 * s_a + s_b of the pair (a, b);
/// 2D has the single pair (1, 2), 3D the pairs (2, 3), (3, 1), (1, 2).
struct CurlField {
    std::vector<Vector> components;
    Vector measure;
};

/// Axis pairs (a, b) of the curl components.
std::vector<std::array<int, 2>> curl_pairs(int dimension);

CellField div_cells(const MacGrid& g, const VelocityField& u);
VelocityField grad_faces(const MacGrid& g, const CellField& p);
/// Gradient with the homogeneous Dirichlet one-sided difference on exterior faces.
VelocityField grad_faces_ext(const MacGrid& g, const CellField& w);

/// -Delta_E u on interior faces, 0 on exterior faces.
VelocityField laplacian_faces(const MacGrid& g, const VelocityField& u);
/// -Delta_M w with homogeneous Dirichlet data.
CellField laplacian_cells(const MacGrid& g, const CellField& w);
/// Symmetric transmissibility matrix T with (T w)_K = |K| (-Delta_M w)_K.
SparseMatrix assemble_laplacian_cells(const MacGrid& g);
/// w with -Delta_M w = rho. Throws std::runtime_error on factorization failure.
CellField solve_primal_poisson(const MacGrid& g, const CellField& rho, double* residual = nullptr);

PieceField grad_full(const MacGrid& g, const VelocityField& u);
double integrate_product(const MacGrid& g, const PieceField& a, const PieceField& b);
CurlField curl_faces(const MacGrid& g, const VelocityField& v);
double integrate_product(const CurlField& a, const CurlField& b);

double h1_inner(const MacGrid& g, const VelocityField& u, const VelocityField& v);
double h1_norm(const MacGrid& g, const VelocityField& u);

MassFluxes mass_fluxes(const MacGrid& g, const CellField& rho, const VelocityField& u);
CellField div_upwind(const MacGrid& g, const MassFluxes& F);
CellField div_upwind(const MacGrid& g, const CellField& rho, const VelocityField& u);
DualFluxes dual_fluxes(const MacGrid& g, const MassFluxes& F, int direction);
/// Sum over the dual faces of D_sigma of the outward dual fluxes, per face of the direction.
FaceField dual_flux_balance(const MacGrid& g, const DualFluxes& F);
FaceField dual_density(const MacGrid& g, const CellField& rho, int direction);
VelocityField dual_density(const MacGrid& g, const CellField& rho);
/// div_E(rho u x u) with centred u_eps; 0 on exterior faces.
VelocityField convective_div(const MacGrid& g, const CellField& rho, const VelocityField& u);

/// Sum over interior faces of |sigma| rho_{sigma,beta} |u_sigma| [rho]^2.
/// Throws std::domain_error when rho <= 0 is met with beta < 2 or rho < 0 with beta > 2.
double weak_bv_sum(const MacGrid& g, const CellField& rho, const VelocityField& u, double beta);

/// p - (2 mu + lambda) div_M u.
CellField effective_viscous_flux(const MacGrid& g, const CellField& p, const VelocityField& u, double mu,
                                 double lambda);

/// Matrices on the interior-face unknowns of DofLayout.
/// D: cells x dofs, (D x)_K = (div_M u)_K.
SparseMatrix assemble_div(const MacGrid& g, const DofLayout& layout);
/// G: dofs x cells, G p = grad_faces(p) restricted to interior faces.
SparseMatrix assemble_grad(const MacGrid& g, const DofLayout& layout);
/// L: dofs x dofs, L x = -Delta_E u restricted to interior faces.
SparseMatrix assemble_laplacian_faces(const MacGrid& g, const DofLayout& layout);

/// One `row col value` line per stored entry.
void write_coo(std::ostream& os, const SparseMatrix& A);

}  // namespace macns
