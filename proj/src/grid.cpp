#include "macns/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <sstream>

namespace macns {

DomainSpec DomainSpec::unit_square() {
    return DomainSpec{2, {Box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}}}};
}

DomainSpec DomainSpec::unit_cube() {
    return DomainSpec{3, {Box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}}}};
}

DomainSpec DomainSpec::l_shape() {
    return DomainSpec{2, {Box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}}, Box{{1.0, 0.0, 0.0}, {2.0, 0.5, 1.0}}}};
}

Refinement Refinement::uniform(int n) { return uniform({n, n, n}); }

Refinement Refinement::uniform(std::array<int, 3> n) {
    Refinement r;
    r.cells = n;
    return r;
}

Refinement Refinement::from_lines(std::vector<double> x, std::vector<double> y, std::vector<double> z) {
    Refinement r;
    r.lines = {std::move(x), std::move(y), std::move(z)};
    return r;
}

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

// Index of `x` in `lines` within tolerance, -1 if absent.
int find_line(const std::vector<double>& lines, double x, double tol) {
    auto it = std::lower_bound(lines.begin(), lines.end(), x - tol);
    if (it != lines.end() && std::abs(*it - x) <= tol) return static_cast<int>(it - lines.begin());
    return -1;
}

}  // namespace

int MacGrid::lattice_id(const LatticeIndex& idx) const {
    return (idx[0] * n_[1] + idx[1]) * n_[2] + idx[2];
}

bool MacGrid::active(const LatticeIndex& idx) const { return cell_at(idx) >= 0; }

int MacGrid::cell_at(const LatticeIndex& idx) const {
    for (int a = 0; a < 3; ++a)
        if (idx[a] < 0 || idx[a] >= n_[a]) return -1;
    return lattice_to_cell_[lattice_id(idx)];
}

int MacGrid::tangent_piece(int dir, int sigma, int axis, int side, int cellside) const {
    return tangent_lookup_[dir][sigma][axis * 4 + (side > 0 ? 2 : 0) + cellside];
}

std::vector<int> MacGrid::neighbor_faces(int target, int sigma, int source) const {
    std::vector<int> out;
    const Face& f = faces_[target][sigma];
    for (int c : f.cells) {
        if (c < 0) continue;
        out.push_back(cells_[c].faces[source][0]);
        out.push_back(cells_[c].faces[source][1]);
    }
    return out;
}

double MacGrid::diameter() const {
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) {
        const double l = lines_[a].back() - lines_[a].front();
        s += l * l;
    }
    return std::sqrt(s);
}

std::string MacGrid::summary() const {
    std::ostringstream os;
    os << "dimension: " << dim_ << "\n";
    os << "lattice:";
    for (int a = 0; a < dim_; ++a) os << " " << n_[a];
    os << "\n";
    os << "cells: " << num_cells() << "\n";
    for (int i = 0; i < dim_; ++i)
        os << "faces_" << i + 1 << ": " << num_faces(i) << " (interior " << num_interior_faces(i) << ")\n";
    os << "measure: " << fmt(measure_) << "\n";
    os << "h_M: " << fmt(h_) << "\n";
    os << "eta_M: " << fmt(eta_) << "\n";
    for (const auto& w : warnings_) os << "warning: " << w << "\n";
    return os.str();
}

MacGrid build_grid(const DomainSpec& spec, const Refinement& refinement) {
    const int d = spec.dimension;
    if (d != 2 && d != 3) throw GridError("dimension must be 2 or 3, got " + std::to_string(d));
    if (spec.boxes.empty()) throw GridError("domain has no boxes");

    Point lo{0.0, 0.0, 0.0}, hi{1.0, 1.0, 1.0};
    for (int a = 0; a < d; ++a) {
        lo[a] = spec.boxes.front().lo[a];
        hi[a] = spec.boxes.front().hi[a];
        for (const auto& b : spec.boxes) {
            if (!(b.lo[a] < b.hi[a]))
                throw GridError("degenerate box on axis " + std::to_string(a + 1) + ": [" + fmt(b.lo[a]) + ", " +
                                fmt(b.hi[a]) + "]");
            lo[a] = std::min(lo[a], b.lo[a]);
            hi[a] = std::max(hi[a], b.hi[a]);
        }
    }

    MacGrid g;
    g.dim_ = d;
    for (int a = 0; a < 3; ++a) {
        auto& L = g.lines_[a];
        if (a >= d) {
            L = {0.0, 1.0};
        } else if (refinement.explicit_lines()) {
            L = refinement.lines[a];
            if (L.size() < 2) throw GridError("axis " + std::to_string(a + 1) + " needs at least two lines");
            for (std::size_t k = 1; k < L.size(); ++k)
                if (!(L[k] > L[k - 1]))
                    throw GridError("lines on axis " + std::to_string(a + 1) + " are not strictly increasing at " +
                                    fmt(L[k]));
        } else {
            const int n = refinement.cells[a];
            if (n < 1) throw GridError("cell count on axis " + std::to_string(a + 1) + " must be positive");
            L.resize(n + 1);
            for (int k = 0; k <= n; ++k) L[k] = lo[a] + (hi[a] - lo[a]) * k / n;
            L[n] = hi[a];
        }
        g.n_[a] = static_cast<int>(L.size()) - 1;
    }

    for (int a = 0; a < d; ++a) {
        auto& L = g.lines_[a];
        const double tol = 1e-10 * (hi[a] - lo[a]);
        if (std::abs(L.front() - lo[a]) > tol || std::abs(L.back() - hi[a]) > tol)
            throw GridError("lines on axis " + std::to_string(a + 1) + " do not span the domain [" + fmt(lo[a]) +
                            ", " + fmt(hi[a]) + "]");
        L.front() = lo[a];
        L.back() = hi[a];
        for (const auto& b : spec.boxes)
            for (double x : {b.lo[a], b.hi[a]})
                if (find_line(L, x, tol) < 0)
                    throw GridError("box coordinate " + fmt(x) + " on axis " + std::to_string(a + 1) +
                                    " is not a grid line");
        if (g.n_[a] == 1)
            g.warnings_.push_back("axis " + std::to_string(a + 1) + " has a single cell: no interior faces");
    }

    // Active mask from cell centres.
    const int nl = g.n_[0] * g.n_[1] * g.n_[2];
    g.lattice_to_cell_.assign(nl, -1);
    std::vector<char> inside(nl, 0);
    for (int i0 = 0; i0 < g.n_[0]; ++i0)
        for (int i1 = 0; i1 < g.n_[1]; ++i1)
            for (int i2 = 0; i2 < g.n_[2]; ++i2) {
                const LatticeIndex idx{i0, i1, i2};
                Point c{};
                for (int a = 0; a < 3; ++a) c[a] = 0.5 * (g.lines_[a][idx[a]] + g.lines_[a][idx[a] + 1]);
                for (const auto& b : spec.boxes) {
                    bool in = true;
                    for (int a = 0; a < d; ++a) in = in && c[a] > b.lo[a] && c[a] < b.hi[a];
                    if (in) {
                        inside[g.lattice_id(idx)] = 1;
                        break;
                    }
                }
            }

    // Cells in lexicographic order.
    for (int i0 = 0; i0 < g.n_[0]; ++i0)
        for (int i1 = 0; i1 < g.n_[1]; ++i1)
            for (int i2 = 0; i2 < g.n_[2]; ++i2) {
                const LatticeIndex idx{i0, i1, i2};
                if (!inside[g.lattice_id(idx)]) continue;
                Cell c;
                c.idx = idx;
                c.volume = 1.0;
                for (int a = 0; a < 3; ++a) {
                    c.center[a] = 0.5 * (g.lines_[a][idx[a]] + g.lines_[a][idx[a] + 1]);
                    c.width[a] = g.lines_[a][idx[a] + 1] - g.lines_[a][idx[a]];
                    if (a < d) c.volume *= c.width[a];
                }
                g.lattice_to_cell_[g.lattice_id(idx)] = static_cast<int>(g.cells_.size());
                g.cells_.push_back(c);
            }
    if (g.cells_.empty()) throw GridError("no lattice cell lies inside the domain");

    // Face connectivity of the active cells.
    {
        std::vector<char> seen(g.cells_.size(), 0);
        std::deque<int> queue{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!queue.empty()) {
            const int k = queue.front();
            queue.pop_front();
            for (int a = 0; a < d; ++a)
                for (int s : {-1, 1}) {
                    LatticeIndex nb = g.cells_[k].idx;
                    nb[a] += s;
                    const int m = g.cell_at(nb);
                    if (m >= 0 && !seen[m]) {
                        seen[m] = 1;
                        ++count;
                        queue.push_back(m);
                    }
                }
        }
        if (count != g.cells_.size()) throw GridError("the union of boxes is not connected");
    }

    // Faces per direction.
    for (int i = 0; i < d; ++i) {
        std::array<int, 3> extent = g.n_;
        extent[i] += 1;
        for (int i0 = 0; i0 < extent[0]; ++i0)
            for (int i1 = 0; i1 < extent[1]; ++i1)
                for (int i2 = 0; i2 < extent[2]; ++i2) {
                    const LatticeIndex idx{i0, i1, i2};
                    LatticeIndex below = idx;
                    below[i] -= 1;
                    const int cl = g.cell_at(below);
                    const int cu = g.cell_at(idx);
                    if (cl < 0 && cu < 0) continue;
                    Face f;
                    f.direction = i;
                    f.idx = idx;
                    f.cells = {cl, cu};
                    f.interior = cl >= 0 && cu >= 0;
                    f.area = 1.0;
                    for (int a = 0; a < 3; ++a) {
                        if (a == i) {
                            f.center[a] = g.lines_[a][idx[a]];
                        } else {
                            f.center[a] = 0.5 * (g.lines_[a][idx[a]] + g.lines_[a][idx[a] + 1]);
                            if (a < d) f.area *= g.lines_[a][idx[a] + 1] - g.lines_[a][idx[a]];
                        }
                    }
                    const int id = static_cast<int>(g.faces_[i].size());
                    for (int s = 0; s < 2; ++s) {
                        if (f.cells[s] < 0) continue;
                        f.half_volume[s] = 0.5 * g.cells_[f.cells[s]].volume;
                        f.dual_volume += f.half_volume[s];
                        g.cells_[f.cells[s]].faces[i][1 - s] = id;
                    }
                    if (f.interior) ++g.n_interior_[i];
                    g.faces_[i].push_back(f);
                }
    }

    // Dual pieces per direction.
    for (int i = 0; i < d; ++i) {
        auto& pieces = g.pieces_[i];
        auto& lookup = g.tangent_lookup_[i];
        lookup.assign(g.faces_[i].size(), {});
        for (auto& row : lookup) row.fill(-1);

        for (int k = 0; k < g.num_cells(); ++k) {
            const Cell& c = g.cells_[k];
            DualPiece p;
            p.sigma = c.faces[i][0];
            p.neighbor = c.faces[i][1];
            p.axis = i;
            p.cell = k;
            p.side = 1;
            p.area = c.volume / c.width[i];
            p.dist = c.width[i];
            pieces.push_back(p);
        }
        for (int s = 0; s < g.num_faces(i); ++s) {
            const Face& f = g.faces_[i][s];
            for (int j = 0; j < d; ++j) {
                if (j == i) continue;
                for (int cs = 0; cs < 2; ++cs) {
                    const int k = f.cells[cs];
                    if (k < 0) continue;
                    const Cell& c = g.cells_[k];
                    for (int side : {-1, 1}) {
                        LatticeIndex nb = c.idx;
                        nb[j] += side;
                        const int m = g.cell_at(nb);
                        const int slot = j * 4 + (side > 0 ? 2 : 0) + cs;
                        if (m >= 0) {
                            if (side < 0) continue;  // stored once, from the lower face
                            const Cell& cn = g.cells_[m];
                            DualPiece p;
                            p.sigma = s;
                            p.neighbor = cn.faces[i][1 - cs];
                            p.axis = j;
                            p.cell = k;
                            p.side = 1;
                            p.area = 0.5 * c.volume / c.width[j];
                            p.dist = 0.5 * (c.width[j] + cn.width[j]);
                            const int id = static_cast<int>(pieces.size());
                            pieces.push_back(p);
                            lookup[s][slot] = id;
                            lookup[p.neighbor][j * 4 + 0 + cs] = id;
                        } else {
                            DualPiece p;
                            p.sigma = s;
                            p.neighbor = -1;
                            p.axis = j;
                            p.cell = k;
                            p.side = side;
                            p.area = 0.5 * c.volume / c.width[j];
                            p.dist = 0.5 * c.width[j];
                            lookup[s][slot] = static_cast<int>(pieces.size());
                            pieces.push_back(p);
                        }
                    }
                }
            }
        }
    }

    g.measure_ = 0.0;
    g.h_ = 0.0;
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& c : g.cells_) {
        g.measure_ += c.volume;
        double diam2 = 0.0;
        for (int a = 0; a < d; ++a) {
            diam2 += c.width[a] * c.width[a];
            dmin = std::min(dmin, c.width[a]);
        }
        g.h_ = std::max(g.h_, std::sqrt(diam2));
    }
    g.eta_ = dmin / g.h_;
    return g;
}

}  // namespace macns
