#include "macns/fields.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace macns {

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("quadrature order must be positive");
    // Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the Legendre recurrence.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        // Newton on P_n from the eigenvalue guess; weights from the closed form.
        double x = es.eigenvalues()(k), dp = 1.0;
        for (int it = 0; it < 3; ++it) {
            double p0 = 1.0, p1 = x;
            for (int m = 2; m <= n; ++m) {
                const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            x -= p1 / dp;
        }
        r.nodes[k] = 0.5 * (x + 1.0);
        r.weights[k] = 1.0 / ((1.0 - x * x) * dp * dp);  // sums to 1 on [0, 1]
    }
    return r;
}

double integrate_box(const std::function<double(const Point&)>& f, const Point& lo, const Point& hi, int dim,
                     int order) {
    const QuadratureRule q = gauss_legendre(order);
    std::array<int, 3> count{1, 1, 1};
    double jac = 1.0;
    for (int a = 0; a < dim; ++a) {
        if (hi[a] > lo[a]) {
            count[a] = order;
            jac *= hi[a] - lo[a];
        }
    }
    double s = 0.0;
    Point x{lo[0], lo[1], lo[2]};
    for (int a = dim; a < 3; ++a) x[a] = 0.5 * (lo[a] + hi[a]);
    for (int i0 = 0; i0 < count[0]; ++i0)
        for (int i1 = 0; i1 < count[1]; ++i1)
            for (int i2 = 0; i2 < count[2]; ++i2) {
                const std::array<int, 3> k{i0, i1, i2};
                double w = 1.0;
                for (int a = 0; a < dim; ++a) {
                    if (count[a] == 1) {
                        x[a] = lo[a];
                    } else {
                        x[a] = lo[a] + (hi[a] - lo[a]) * q.nodes[k[a]];
                        w *= q.weights[k[a]];
                    }
                }
                s += w * f(x);
            }
    return s * jac;
}

CellField zero_cells(const MacGrid& g) { return CellField{Vector::Zero(g.num_cells())}; }

FaceField zero_faces(const MacGrid& g, int direction, bool zero_on_boundary) {
    return FaceField{direction, Vector::Zero(g.num_faces(direction)), zero_on_boundary};
}

VelocityField zero_velocity(const MacGrid& g, bool zero_on_boundary) {
    VelocityField v;
    for (int i = 0; i < g.dimension(); ++i) v.components.push_back(zero_faces(g, i, zero_on_boundary));
    return v;
}

void clear_boundary(const MacGrid& g, FaceField& v) {
    for (int s = 0; s < g.num_faces(v.direction); ++s)
        if (!g.face(v.direction, s).interior) v.values[s] = 0.0;
    v.zero_on_boundary = true;
}

void clear_boundary(const MacGrid& g, VelocityField& v) {
    for (auto& c : v.components) clear_boundary(g, c);
}

namespace {

VelocityField combine(const VelocityField& a, const VelocityField& b, double sb) {
    VelocityField r = a;
    for (int i = 0; i < a.dimension(); ++i) {
        r[i].values += sb * b[i].values;
        r[i].zero_on_boundary = a[i].zero_on_boundary && b[i].zero_on_boundary;
    }
    return r;
}

}  // namespace

VelocityField operator+(const VelocityField& a, const VelocityField& b) { return combine(a, b, 1.0); }
VelocityField operator-(const VelocityField& a, const VelocityField& b) { return combine(a, b, -1.0); }

VelocityField operator*(double s, const VelocityField& a) {
    VelocityField r = a;
    for (auto& c : r.components) c.values *= s;
    return r;
}

double l2_inner(const MacGrid& g, const CellField& a, const CellField& b) {
    double s = 0.0;
    for (int k = 0; k < g.num_cells(); ++k) s += g.cell(k).volume * a.values[k] * b.values[k];
    return s;
}

double l2_inner(const MacGrid& g, const FaceField& a, const FaceField& b) {
    double s = 0.0;
    for (int f = 0; f < g.num_faces(a.direction); ++f)
        s += g.face(a.direction, f).dual_volume * a.values[f] * b.values[f];
    return s;
}

double l2_inner(const MacGrid& g, const VelocityField& a, const VelocityField& b) {
    double s = 0.0;
    for (int i = 0; i < a.dimension(); ++i) s += l2_inner(g, a[i], b[i]);
    return s;
}

double l2_norm(const MacGrid& g, const CellField& a) { return std::sqrt(l2_inner(g, a, a)); }
double l2_norm(const MacGrid& g, const VelocityField& a) { return std::sqrt(l2_inner(g, a, a)); }

double lq_norm(const MacGrid& g, const CellField& a, double q) {
    double s = 0.0;
    for (int k = 0; k < g.num_cells(); ++k) s += g.cell(k).volume * std::pow(std::abs(a.values[k]), q);
    return std::pow(s, 1.0 / q);
}

double lq_norm(const MacGrid& g, const FaceField& a, double q) {
    double s = 0.0;
    for (int f = 0; f < g.num_faces(a.direction); ++f)
        s += g.face(a.direction, f).dual_volume * std::pow(std::abs(a.values[f]), q);
    return std::pow(s, 1.0 / q);
}

double lq_norm(const MacGrid& g, const VelocityField& a, double q) {
    double s = 0.0;
    for (const auto& c : a.components) s += std::pow(lq_norm(g, c, q), q);
    return std::pow(s, 1.0 / q);
}

double integral(const MacGrid& g, const CellField& a) {
    double s = 0.0;
    for (int k = 0; k < g.num_cells(); ++k) s += g.cell(k).volume * a.values[k];
    return s;
}

DofLayout::DofLayout(const MacGrid& g) : g_(&g) {
    for (int i = 0; i < g.dimension(); ++i) {
        offset_[i] = n_;
        map_[i].assign(g.num_faces(i), -1);
        for (int s = 0; s < g.num_faces(i); ++s)
            if (g.face(i, s).interior) map_[i][s] = n_++;
    }
}

Vector DofLayout::pack(const VelocityField& v) const {
    Vector x(n_);
    for (int i = 0; i < g_->dimension(); ++i)
        for (int s = 0; s < g_->num_faces(i); ++s)
            if (map_[i][s] >= 0) x[map_[i][s]] = v[i].values[s];
    return x;
}

VelocityField DofLayout::unpack(const Vector& x) const {
    VelocityField v = zero_velocity(*g_);
    for (int i = 0; i < g_->dimension(); ++i)
        for (int s = 0; s < g_->num_faces(i); ++s)
            if (map_[i][s] >= 0) v[i].values[s] = x[map_[i][s]];
    return v;
}

namespace {

void cell_box(const Cell& c, Point& lo, Point& hi) {
    for (int a = 0; a < 3; ++a) {
        lo[a] = c.center[a] - 0.5 * c.width[a];
        hi[a] = c.center[a] + 0.5 * c.width[a];
    }
}

}  // namespace

CellField project_cells(const ScalarFunction& q, const MacGrid& g) {
    CellField r = zero_cells(g);
    for (int k = 0; k < g.num_cells(); ++k) {
        Point lo, hi;
        cell_box(g.cell(k), lo, hi);
        r.values[k] = integrate_box(q.eval, lo, hi, g.dimension(), q.order) / g.cell(k).volume;
    }
    return r;
}

VelocityField project_faces_mean(const VectorFunction& v, const MacGrid& g) {
    VelocityField r = zero_velocity(g);
    for (int i = 0; i < g.dimension(); ++i) {
        const auto comp = [&](const Point& x) { return v.eval(x)[i]; };
        for (int s = 0; s < g.num_faces(i); ++s) {
            const Face& f = g.face(i, s);
            if (!f.interior) continue;
            // D_sigma is the union of two half cells; integrate each half separately.
            double acc = 0.0;
            for (int side = 0; side < 2; ++side) {
                Point lo, hi;
                cell_box(g.cell(f.cells[side]), lo, hi);
                if (side == 0)
                    lo[i] = g.cell(f.cells[side]).center[i];
                else
                    hi[i] = g.cell(f.cells[side]).center[i];
                acc += integrate_box(comp, lo, hi, g.dimension(), v.order);
            }
            r[i].values[s] = acc / f.dual_volume;
        }
    }
    return r;
}

VelocityField fortin_interpolate(const VectorFunction& v, const MacGrid& g) {
    VelocityField r = zero_velocity(g);
    for (int i = 0; i < g.dimension(); ++i) {
        const auto comp = [&](const Point& x) { return v.eval(x)[i]; };
        for (int s = 0; s < g.num_faces(i); ++s) {
            const Face& f = g.face(i, s);
            Point lo, hi;
            const int k = f.cells[0] >= 0 ? f.cells[0] : f.cells[1];
            cell_box(g.cell(k), lo, hi);
            lo[i] = hi[i] = f.center[i];
            const double mean = integrate_box(comp, lo, hi, g.dimension(), v.order) / f.area;
            if (f.interior) {
                r[i].values[s] = mean;
            } else if (std::abs(mean) > 1e-10) {
                std::ostringstream os;
                os << "nonzero boundary trace " << mean << " on face " << s << " of direction " << i + 1;
                throw GridError(os.str());
            }
        }
    }
    return r;
}

CellField interpolate_phi(const ScalarFunction& phi, const MacGrid& g) {
    CellField r = zero_cells(g);
    for (int k = 0; k < g.num_cells(); ++k) r.values[k] = phi.eval(g.cell(k).center);
    return r;
}

FaceField reconstruct_face(const FaceField& v, int target, const MacGrid& g) {
    if (target == v.direction) return v;
    FaceField r = zero_faces(g, target);
    for (int s = 0; s < g.num_faces(target); ++s) {
        if (!g.face(target, s).interior) continue;
        double acc = 0.0;
        for (int n : g.neighbor_faces(target, s, v.direction))
            if (g.face(v.direction, n).interior) acc += v.values[n];
        r.values[s] = 0.25 * acc;
    }
    return r;
}

CellField reconstruct_cell(const FaceField& v, const MacGrid& g) {
    CellField r = zero_cells(g);
    const int i = v.direction;
    for (int k = 0; k < g.num_cells(); ++k)
        r.values[k] = 0.5 * (v.values[g.cell(k).faces[i][0]] + v.values[g.cell(k).faces[i][1]]);
    return r;
}

namespace {

void write_row(std::ostream& os, int id, const Point& x, int dim, double value) {
    os << id;
    for (int a = 0; a < dim; ++a) os << ',' << x[a];
    os << ',' << value << '\n';
}

void write_header(std::ostream& os, int dim) {
    os << "id,x,y";
    if (dim == 3) os << ",z";
    os << ",value\n";
}

}  // namespace

void write_csv(std::ostream& os, const MacGrid& g, const CellField& f) {
    const auto old = os.precision(17);
    write_header(os, g.dimension());
    for (int k = 0; k < g.num_cells(); ++k) write_row(os, k, g.cell(k).center, g.dimension(), f.values[k]);
    os.precision(old);
}

void write_csv(std::ostream& os, const MacGrid& g, const FaceField& f) {
    const auto old = os.precision(17);
    write_header(os, g.dimension());
    for (int s = 0; s < g.num_faces(f.direction); ++s)
        write_row(os, s, g.face(f.direction, s).center, g.dimension(), f.values[s]);
    os.precision(old);
}

}  // namespace macns
