#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "macns/grid.hpp"

namespace macns {

/// Piecewise constant scalar on primal cells.
struct CellField {
    Vector values;
};

/// Piecewise constant scalar on the dual cells of one direction, indexed by face id.
struct FaceField {
    int direction = 0;
    Vector values;
    bool zero_on_boundary = true;
};

/// One FaceField per direction.
struct VelocityField {
    std::vector<FaceField> components;

    FaceField& operator[](int i) { return components[i]; }
    const FaceField& operator[](int i) const { return components[i]; }
    int dimension() const { return static_cast<int>(components.size()); }
};

struct ScalarFunction {
    std::function<double(const Point&)> eval;
    int order = 5;
};

struct VectorFunction {
    std::function<Point(const Point&)> eval;
    int order = 5;
};

/// Gauss-Legendre rule with n points on [0, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
QuadratureRule gauss_legendre(int n);

/// Integral of f over the box [lo, hi] restricted to the first `dim` axes; axes with lo == hi are
/// treated as degenerate (surface integrals).
double integrate_box(const std::function<double(const Point&)>& f, const Point& lo, const Point& hi, int dim,
                     int order);

CellField zero_cells(const MacGrid& g);
FaceField zero_faces(const MacGrid& g, int direction, bool zero_on_boundary = true);
VelocityField zero_velocity(const MacGrid& g, bool zero_on_boundary = true);

/// Sets every exterior entry to 0 and marks the field zero-on-boundary.
void clear_boundary(const MacGrid& g, FaceField& v);
void clear_boundary(const MacGrid& g, VelocityField& v);

VelocityField operator+(const VelocityField& a, const VelocityField& b);
VelocityField operator-(const VelocityField& a, const VelocityField& b);
VelocityField operator*(double s, const VelocityField& a);

/// L2 inner products of the piecewise constant representations.
double l2_inner(const MacGrid& g, const CellField& a, const CellField& b);
double l2_inner(const MacGrid& g, const FaceField& a, const FaceField& b);
double l2_inner(const MacGrid& g, const VelocityField& a, const VelocityField& b);
double l2_norm(const MacGrid& g, const CellField& a);
double l2_norm(const MacGrid& g, const VelocityField& a);
double lq_norm(const MacGrid& g, const CellField& a, double q);
double lq_norm(const MacGrid& g, const FaceField& a, double q);
/// (sum_i int |u_i|^q)^(1/q).
double lq_norm(const MacGrid& g, const VelocityField& a, double q);
double integral(const MacGrid& g, const CellField& a);

/// Numbering of interior faces of all directions into one unknown vector.
class DofLayout {
public:
    explicit DofLayout(const MacGrid& g);
    int size() const { return n_; }
    int offset(int dir) const { return offset_[dir]; }
    /// Unknown index of a face, -1 for exterior faces.
    int dof(int dir, int face) const { return map_[dir][face]; }
    Vector pack(const VelocityField& v) const;
    VelocityField unpack(const Vector& x) const;

private:
    const MacGrid* g_;
    int n_ = 0;
    std::array<int, 3> offset_{0, 0, 0};
    std::array<std::vector<int>, 3> map_;
};

/// P_M: cell means.
CellField project_cells(const ScalarFunction& q, const MacGrid& g);
/// P_E: means over interior dual cells, 0 on exterior faces.
VelocityField project_faces_mean(const VectorFunction& v, const MacGrid& g);
/// Fortin interpolant: face means. Throws GridError when a boundary face mean exceeds 1e-10.
VelocityField fortin_interpolate(const VectorFunction& v, const MacGrid& g);
/// phi_M: point values at cell centres.
CellField interpolate_phi(const ScalarFunction& phi, const MacGrid& g);
/// R_E^(i,j): mean of the four direction-i faces of the cells adjacent to each direction-j face.
FaceField reconstruct_face(const FaceField& v, int target, const MacGrid& g);
/// R_M^(i): mean of the two direction-i faces of each cell.
CellField reconstruct_cell(const FaceField& v, const MacGrid& g);

void write_csv(std::ostream& os, const MacGrid& g, const CellField& f);
void write_csv(std::ostream& os, const MacGrid& g, const FaceField& f);

}  // namespace macns
