#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace macns {

using Vector = Eigen::VectorXd;
using Point = std::array<double, 3>;
using LatticeIndex = std::array<int, 3>;

/// Raised for every invalid domain or refinement description.
class GridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed axis-aligned box. Unused trailing axes (d = 2) are ignored.
struct Box {
    Point lo{0.0, 0.0, 0.0};
    Point hi{1.0, 1.0, 1.0};

    bool operator==(const Box&) const = default;
};

struct DomainSpec {
    int dimension = 2;
    std::vector<Box> boxes;

    static DomainSpec unit_square();
    static DomainSpec unit_cube();
    /// [0,1]^2 union [1,2]x[0,0.5].
    static DomainSpec l_shape();

    bool operator==(const DomainSpec&) const = default;
};

/// Either uniform cell counts over the bounding box or explicit coordinate lines per axis.
struct Refinement {
    std::array<int, 3> cells{0, 0, 0};
    std::array<std::vector<double>, 3> lines;

    static Refinement uniform(int n);
    static Refinement uniform(std::array<int, 3> n);
    static Refinement from_lines(std::vector<double> x, std::vector<double> y, std::vector<double> z = {});

    bool explicit_lines() const { return !lines[0].empty(); }

    bool operator==(const Refinement&) const = default;
};

struct Cell {
    LatticeIndex idx{};
    Point center{};
    Point width{1.0, 1.0, 1.0};
    double volume = 0.0;
    /// faces[i][0] is the face on the -e_i side, faces[i][1] on the +e_i side (ids within E^(i)).
    std::array<std::array<int, 2>, 3> faces{};
};

struct Face {
    int direction = 0;
    LatticeIndex idx{};
    Point center{};
    double area = 0.0;
    /// cells[0] lies on the -e_i side, cells[1] on the +e_i side; -1 when outside the domain.
    std::array<int, 2> cells{-1, -1};
    bool interior = false;
    double dual_volume = 0.0;
    std::array<double, 2> half_volume{0.0, 0.0};
};

/// One piece of a dual face of the i-th dual mesh.
///
/// Normal pieces (axis == direction) separate the two i-faces of one primal cell.
/// Tangent pieces (axis != direction) cover the half of a primal j-face lying in `cell`;
/// they join `sigma` to `neighbor` (its +e_axis translate) or, when `neighbor < 0`, close
/// D_sigma on the boundary on the `side` of `sigma`. The box D_eps attached to a piece has
/// measure area * dist.
struct DualPiece {
    int sigma = -1;
    int neighbor = -1;
    int axis = 0;
    int cell = -1;
    int side = 1;
    double area = 0.0;
    double dist = 0.0;

    bool interior() const { return neighbor >= 0; }
};

class MacGrid {
public:
    int dimension() const { return dim_; }
    const std::array<int, 3>& lattice_cells() const { return n_; }
    const std::vector<double>& lines(int axis) const { return lines_[axis]; }
    bool active(const LatticeIndex& idx) const;
    /// Cell id of a lattice position, -1 when outside the lattice or inactive.
    int cell_at(const LatticeIndex& idx) const;

    int num_cells() const { return static_cast<int>(cells_.size()); }
    int num_faces(int dir) const { return static_cast<int>(faces_[dir].size()); }
    int num_interior_faces(int dir) const { return n_interior_[dir]; }
    const Cell& cell(int id) const { return cells_[id]; }
    const std::vector<Cell>& cells() const { return cells_; }
    const Face& face(int dir, int id) const { return faces_[dir][id]; }
    const std::vector<Face>& faces(int dir) const { return faces_[dir]; }
    const std::vector<DualPiece>& pieces(int dir) const { return pieces_[dir]; }

    /// Tangent piece covering the half of D_sigma inside `cellside` (0: cells[0], 1: cells[1]),
    /// on the `side` (+1/-1) of sigma along `axis`. -1 when that cell is absent.
    int tangent_piece(int dir, int sigma, int axis, int side, int cellside) const;

    /// The up-to-four faces of E^(source) bounding the cells adjacent to sigma in E^(target).
    std::vector<int> neighbor_faces(int target, int sigma, int source) const;

    double measure() const { return measure_; }
    double mesh_size() const { return h_; }
    double regularity() const { return eta_; }
    /// Diameter of the bounding box of the domain.
    double diameter() const;
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// Plain-text summary: counts, h_M, eta_M.
    std::string summary() const;

private:
    friend MacGrid build_grid(const DomainSpec&, const Refinement&);

    int lattice_id(const LatticeIndex& idx) const;

    int dim_ = 2;
    std::array<int, 3> n_{1, 1, 1};
    std::array<std::vector<double>, 3> lines_;
    std::vector<int> lattice_to_cell_;
    std::vector<Cell> cells_;
    std::array<std::vector<Face>, 3> faces_;
    std::array<int, 3> n_interior_{0, 0, 0};
    std::array<std::vector<DualPiece>, 3> pieces_;
    std::array<std::vector<std::array<int, 12>>, 3> tangent_lookup_;
    double measure_ = 0.0;
    double h_ = 0.0;
    double eta_ = 0.0;
    std::vector<std::string> warnings_;
};

MacGrid build_grid(const DomainSpec& spec, const Refinement& refinement);

inline double mesh_size(const MacGrid& g) { return g.mesh_size(); }
inline double regularity(const MacGrid& g) { return g.regularity(); }

}  // namespace macns
