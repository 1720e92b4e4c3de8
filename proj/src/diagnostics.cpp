#include "macns/diagnostics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

namespace macns {

namespace {

constexpr double pi = 3.14159265358979323846;

class DefectTable {
public:
    void record(const std::string& name, double abs, double scale) {
        auto it = index_.find(name);
        if (it == index_.end()) {
            it = index_.emplace(name, rows_.size()).first;
            rows_.push_back({name, 0.0, 0.0, 0});
        }
        IdentityDefect& d = rows_[it->second];
        d.max_abs = std::max(d.max_abs, std::abs(abs));
        d.max_rel = std::max(d.max_rel, scale > 0.0 ? std::abs(abs) / scale : std::abs(abs));
        ++d.trials;
    }
    std::vector<IdentityDefect> rows() const { return rows_; }

private:
    std::map<std::string, std::size_t> index_;
    std::vector<IdentityDefect> rows_;
};

CellField random_cells(const MacGrid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CellField f = zero_cells(g);
    for (int k = 0; k < g.num_cells(); ++k) f.values[k] = u(rng);
    return f;
}

VelocityField random_velocity(const MacGrid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VelocityField v = zero_velocity(g);
    for (int i = 0; i < g.dimension(); ++i)
        for (int s = 0; s < g.num_faces(i); ++s)
            if (g.face(i, s).interior) v[i].values[s] = u(rng);
    return v;
}

// t^4 (1 - t)^4 on [0, 1], zero outside.
double bump(double t) { return t <= 0.0 || t >= 1.0 ? 0.0 : std::pow(t * (1.0 - t), 4); }
double dbump(double t) {
    return t <= 0.0 || t >= 1.0 ? 0.0 : 4.0 * std::pow(t * (1.0 - t), 3) * (1.0 - 2.0 * t);
}

std::string describe(const MacGrid& g) {
    std::string s = std::to_string(g.dimension()) + "D lattice";
    for (int a = 0; a < g.dimension(); ++a) s += (a ? "x" : " ") + std::to_string(g.lattice_cells()[a]);
    return s + ", " + std::to_string(g.num_cells()) + " cells";
}

}  // namespace

const IdentityDefect& IdentityReport::at(const std::string& name) const {
    for (const auto& d : defects)
        if (d.name == name) return d;
    throw std::out_of_range("no identity named " + name);
}

CompactField random_compact_field(const MacGrid& g, std::mt19937_64& rng) {
    const int d = g.dimension();
    // Grow a box of active cells around a random cell.
    std::uniform_int_distribution<int> pick(0, g.num_cells() - 1), grow(0, 3);
    const LatticeIndex c = g.cell(pick(rng)).idx;
    LatticeIndex lo = c, hi = c;
    const auto all_active = [&](const LatticeIndex& a, const LatticeIndex& b) {
        for (int i0 = a[0]; i0 <= b[0]; ++i0)
            for (int i1 = a[1]; i1 <= b[1]; ++i1)
                for (int i2 = a[2]; i2 <= b[2]; ++i2)
                    if (!g.active({i0, i1, i2})) return false;
        return true;
    };
    for (int a = 0; a < d; ++a)
        for (int side = 0; side < 2; ++side) {
            const int steps = grow(rng);
            for (int k = 0; k < steps; ++k) {
                LatticeIndex l = lo, h = hi;
                (side ? h : l)[a] += side ? 1 : -1;
                if (!all_active(l, h)) break;
                lo = l;
                hi = h;
            }
        }
    Point x0{0, 0, 0}, len{1, 1, 1};
    for (int a = 0; a < d; ++a) {
        x0[a] = g.lines(a)[lo[a]];
        len[a] = g.lines(a)[hi[a] + 1] - x0[a];
    }
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Point amp{0, 0, 0}, k{0, 0, 0};
    for (int a = 0; a < d; ++a) {
        amp[a] = u(rng);
        k[a] = 3.0 * u(rng);
    }
    const double phase = pi * u(rng);

    // Component i is modulated by a wave that does not depend on x_i, so d_i v_i is a polynomial
    // of degree 7 in x_i on every cell of the support.
    const auto wave = [=](const Point& x, int i) {
        double arg = phase;
        for (int a = 0; a < d; ++a)
            if (a != i) arg += k[a] * x[a];
        return std::sin(arg);
    };
    CompactField f;
    f.v.eval = [=](const Point& x) {
        double b = 1.0;
        for (int a = 0; a < d; ++a) b *= bump((x[a] - x0[a]) / len[a]);
        Point r{0, 0, 0};
        for (int i = 0; i < d; ++i) r[i] = amp[i] * b * wave(x, i);
        return r;
    };
    f.div.eval = [=](const Point& x) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) {
            double db = dbump((x[i] - x0[i]) / len[i]) / len[i];
            for (int a = 0; a < d; ++a)
                if (a != i) db *= bump((x[a] - x0[a]) / len[a]);
            s += amp[i] * db * wave(x, i);
        }
        return s;
    };
    return f;
}

IdentityReport run_identity_suite(const MacGrid& g, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    std::mt19937_64 rng(seed);
    DefectTable t;
    for (int trial = 0; trial < trials; ++trial) {
        const CellField q = random_cells(g, rng);
        const VelocityField v = random_velocity(g, rng), w = random_velocity(g, rng);

        const double dual = l2_inner(g, q, div_cells(g, v)) + l2_inner(g, grad_faces(g, q), v);
        t.record("duality", dual, 1.0 + l2_norm(g, q) * l2_norm(g, v));

        const double h1v = h1_norm(g, v), h1w = h1_norm(g, w);
        const double full = integrate_product(g, grad_full(g, v), grad_full(g, w));
        const double hodge = full - l2_inner(g, div_cells(g, v), div_cells(g, w)) -
                             integrate_product(curl_faces(g, v), curl_faces(g, w));
        t.record("hodge", hodge, h1v * h1w);
        t.record("h1_consistency", h1_inner(g, v, w) - full, h1v * h1w);

        const VelocityField gw = grad_faces_ext(g, q);
        double curl = 0.0, scale = 0.0;
        for (const auto& c : curl_faces(g, gw).components) curl = std::max(curl, c.lpNorm<Eigen::Infinity>());
        for (const auto& c : grad_full(g, gw).components) scale = std::max(scale, c.lpNorm<Eigen::Infinity>());
        t.record("curl_grad", curl, scale);

        const VelocityField vp = -1.0 * grad_faces_ext(g, solve_primal_poisson(g, q));
        t.record("div_poisson", (div_cells(g, vp).values - q.values).lpNorm<Eigen::Infinity>(),
                 q.values.lpNorm<Eigen::Infinity>());

        const CompactField phi = random_compact_field(g, rng);
        const CellField pm = project_cells(phi.div, g);
        const VelocityField pv = fortin_interpolate(phi.v, g);
        double fscale = 0.0;
        for (const auto& c : pv.components) fscale = std::max(fscale, c.values.lpNorm<Eigen::Infinity>());
        t.record("fortin", (div_cells(g, pv).values - pm.values).lpNorm<Eigen::Infinity>(),
                 fscale / (g.regularity() * g.mesh_size()));

        CellField rho = q;
        rho.values.array() += 2.0;
        const MassFluxes F = mass_fluxes(g, rho, v);
        const CellField div = div_upwind(g, F);
        double bal = 0.0, bscale = 0.0;
        for (int i = 0; i < g.dimension(); ++i) {
            const FaceField b = dual_flux_balance(g, dual_fluxes(g, F, i));
            for (int s = 0; s < g.num_faces(i); ++s) {
                const Face& f = g.face(i, s);
                if (!f.interior) continue;
                const double e = f.half_volume[0] * div.values[f.cells[0]] + f.half_volume[1] * div.values[f.cells[1]];
                bal = std::max(bal, std::abs(b.values[s] - e));
                bscale = std::max(bscale, std::abs(e));
            }
        }
        t.record("diamond_balance", bal, bscale);
    }
    return {describe(g), seed, t.rows()};
}

double identity_tolerance(const std::string& name) {
    static const std::map<std::string, double> tol{{"duality", 1e-12},      {"hodge", 1e-11},
                                                   {"h1_consistency", 1e-11}, {"curl_grad", 1e-12},
                                                   {"div_poisson", 1e-10},  {"fortin", 1e-9},
                                                   {"diamond_balance", 1e-11}};
    const auto it = tol.find(name);
    if (it == tol.end()) throw std::out_of_range("unknown identity " + name);
    return it->second;
}

bool within_tolerance(const IdentityDefect& d) {
    return (d.name == "fortin" ? d.max_abs : d.max_rel) <= identity_tolerance(d.name);
}

bool all_within_tolerance(const IdentityReport& r) {
    for (const auto& d : r.defects)
        if (!within_tolerance(d)) return false;
    return !r.defects.empty();
}

void write_report(std::ostream& os, const IdentityReport& r) {
    const auto old = os.precision(17);
    os << "grid: " << r.grid << "\nseed: " << r.seed << "\n";
    for (const auto& d : r.defects)
        os << "identity." << d.name << ": max_abs " << d.max_abs << " max_rel " << d.max_rel << " trials "
           << d.trials << " tolerance " << std::setprecision(3) << identity_tolerance(d.name)
           << std::setprecision(17) << (within_tolerance(d) ? " ok" : " exceeded") << "\n";
    os.precision(old);
}

MmsProblem mms_preset(const std::string& name, const SchemeParams& params, const DomainSpec& domain) {
    double measure = 0.0;
    for (const auto& b : domain.boxes) {
        double v = 1.0;
        for (int a = 0; a < domain.dimension; ++a) v *= b.hi[a] - b.lo[a];
        measure += v;
    }
    MmsProblem p;
    p.name = name;
    if (name == "rest") {
        if (domain.boxes.size() != 1) throw ParamError("mms preset 'rest' needs a single box domain");
        const double rs = params.mass / measure;
        p.u.eval = [](const Point&) { return Point{0, 0, 0}; };
        p.rho.eval = [rs](const Point&) { return rs; };
        p.f.eval = [](const Point&) { return Point{0, 0, 0}; };
        return p;
    }
    if (name == "trig") {
        const bool unit = domain.dimension == 2 && domain.boxes.size() == 1 && domain.boxes[0].lo[0] == 0.0 &&
                          domain.boxes[0].lo[1] == 0.0 && domain.boxes[0].hi[0] == 1.0 &&
                          domain.boxes[0].hi[1] == 1.0;
        if (!unit) throw ParamError("mms preset 'trig' needs the 2D unit square");
        const double c = params.mass / (1.0 + 0.1 * 4.0 / (pi * pi));
        const double gamma = params.gamma, mu = params.mu;
        // Stream function sin^2(pi x) sin^2(pi y): u = (pi A(x) B(y), -pi B(x) A(y)),
        // A = sin^2(pi t), B = sin(2 pi t), A' = pi B, B' = 2 pi cos(2 pi t).
        struct Jet {
            double A, dA, ddA, B, dB, ddB;
        };
        const auto jet = [](double t) {
            const double s = std::sin(pi * t), b = std::sin(2 * pi * t), cb = std::cos(2 * pi * t);
            return Jet{s * s, pi * b, 2 * pi * pi * cb, b, 2 * pi * cb, -4 * pi * pi * b};
        };
        p.u.eval = [=](const Point& x) {
            const Jet X = jet(x[0]), Y = jet(x[1]);
            return Point{pi * X.A * Y.B, -pi * X.B * Y.A, 0.0};
        };
        p.rho.eval = [=](const Point& x) { return c * (1.0 + 0.1 * std::sin(pi * x[0]) * std::sin(pi * x[1])); };
        const auto grad_rho = [=](const Point& x) {
            return std::array<double, 2>{c * 0.1 * pi * std::cos(pi * x[0]) * std::sin(pi * x[1]),
                                         c * 0.1 * pi * std::sin(pi * x[0]) * std::cos(pi * x[1])};
        };
        // Mass source div(rho u) = u . grad rho since div u = 0.
        p.g = ScalarFunction{[=](const Point& x) {
            const Point u = p.u.eval(x);
            const auto gr = grad_rho(x);
            return u[0] * gr[0] + u[1] * gr[1];
        }};
        const auto source = p.g->eval;
        const auto velocity = p.u.eval;
        const auto density = p.rho.eval;
        p.f.eval = [=](const Point& x) {
            const Jet X = jet(x[0]), Y = jet(x[1]);
            const Point u = velocity(x);
            const double rho = density(x), g = source(x);
            const double du1dx = pi * X.dA * Y.B, du1dy = pi * X.A * Y.dB;
            const double du2dx = -pi * X.dB * Y.A, du2dy = -pi * X.B * Y.dA;
            const double lap1 = pi * (X.ddA * Y.B + X.A * Y.ddB);
            const double lap2 = -pi * (X.ddB * Y.A + X.B * Y.ddA);
            const auto gr = grad_rho(x);
            const double dp = gamma * std::pow(rho, gamma - 1.0);
            return Point{u[0] * g + rho * (u[0] * du1dx + u[1] * du1dy) + dp * gr[0] - mu * lap1,
                         u[1] * g + rho * (u[0] * du2dx + u[1] * du2dy) + dp * gr[1] - mu * lap2, 0.0};
        };
        return p;
    }
    throw ParamError("unknown mms preset '" + name + "'");
}

namespace {

Refinement level_refinement(const StudySpec& spec, int level) {
    std::array<int, 3> n = spec.base_cells;
    for (int a = 0; a < 3; ++a) n[a] = a < spec.domain.dimension ? n[a] << level : 1;
    return Refinement::uniform(n);
}

// Means of a field on the nested grid `fine` over the cells and faces of `coarse`.
struct Transfer {
    const MacGrid& coarse;
    const MacGrid& fine;
    int ratio;

    CellField cells(const CellField& f) const {
        CellField r = zero_cells(coarse);
        for (int k = 0; k < fine.num_cells(); ++k) {
            LatticeIndex idx = fine.cell(k).idx;
            for (int a = 0; a < 3; ++a) idx[a] /= a < fine.dimension() ? ratio : 1;
            const int c = coarse.cell_at(idx);
            r.values[c] += fine.cell(k).volume * f.values[k];
        }
        for (int c = 0; c < coarse.num_cells(); ++c) r.values[c] /= coarse.cell(c).volume;
        return r;
    }

    VelocityField faces(const VelocityField& v) const {
        VelocityField r = zero_velocity(coarse);
        for (int i = 0; i < coarse.dimension(); ++i) {
            std::map<LatticeIndex, int> lookup;
            for (int s = 0; s < coarse.num_faces(i); ++s) lookup[coarse.face(i, s).idx] = s;
            for (int s = 0; s < fine.num_faces(i); ++s) {
                const Face& f = fine.face(i, s);
                if (f.idx[i] % ratio) continue;
                LatticeIndex idx = f.idx;
                for (int a = 0; a < fine.dimension(); ++a) idx[a] /= ratio;
                const auto it = lookup.find(idx);
                if (it == lookup.end()) continue;
                r[i].values[it->second] += f.area * v[i].values[s];
            }
            for (int s = 0; s < coarse.num_faces(i); ++s) r[i].values[s] /= coarse.face(i, s).area;
            clear_boundary(coarse, r[i]);
        }
        return r;
    }
};

double order(double e0, double e1, double h0, double h1) {
    if (!(e0 > 0.0) || !(e1 > 0.0)) return 0.0;
    return std::log(e0 / e1) / std::log(h0 / h1);
}

}  // namespace

ConvergenceStudy run_convergence_study(const StudySpec& spec, SchemeParams params, const SolverConfig& config) {
    if (spec.levels < 3) throw ParamError("a convergence study needs at least 3 levels");
    ConvergenceStudy study;
    study.mode = spec.mode == StudyMode::mms ? "mms" : "reference";
    if (spec.mode == StudyMode::mms) {
        if (!spec.problem) throw ParamError("mms study without a problem");
        params.forcing = Forcing::analytic(spec.problem->f);
        params.forcing.mass_source = spec.problem->g;
    }

    std::vector<MacGrid> grids;
    std::vector<SolveReport> runs;
    const int solves = spec.mode == StudyMode::mms ? spec.levels : spec.levels + 1;
    for (int l = 0; l < solves; ++l) {
        grids.push_back(build_grid(spec.domain, level_refinement(spec, l)));
        runs.push_back(solve(grids.back(), params, config));
    }
    study.complete = true;
    for (int l = 0; l < spec.levels; ++l) {
        const MacGrid& g = grids[l];
        ConvergenceLevel row;
        row.level = l;
        row.h = g.mesh_size();
        row.solved = runs[l].success;
        const State& s = runs[l].state;
        VelocityField u_ref;
        CellField rho_ref, p_ref;
        if (spec.mode == StudyMode::mms) {
            u_ref = fortin_interpolate(spec.problem->u, g);
            rho_ref = project_cells(spec.problem->rho, g);
            const auto rho = spec.problem->rho.eval;
            const double gamma = params.gamma;
            p_ref = project_cells(ScalarFunction{[=](const Point& x) { return std::pow(rho(x), gamma); }}, g);
        } else {
            row.solved = row.solved && runs.back().success;
            const Transfer tr{g, grids.back(), 1 << (spec.levels - l)};
            u_ref = tr.faces(runs.back().state.u);
            rho_ref = tr.cells(runs.back().state.rho);
            p_ref = tr.cells(pressure(runs.back().state, params));
        }
        if (!row.solved) {
            row.note = runs[l].success ? "reference solve failed" : runs[l].message;
            study.complete = false;
        }
        if (!s.u.components.empty() && s.rho.values.size() > 0) {
            const VelocityField du = s.u - u_ref;
            row.err_u_l2 = l2_norm(g, du);
            row.err_u_h1 = h1_norm(g, du);
            row.err_rho_l2 = l2_norm(g, CellField{s.rho.values - rho_ref.values});
            row.err_p_l2 = l2_norm(g, CellField{pressure(s, params).values - p_ref.values});
        }
        if (l > 0) {
            const ConvergenceLevel& prev = study.levels.back();
            row.order_u = order(prev.err_u_l2, row.err_u_l2, prev.h, row.h);
            row.order_rho = order(prev.err_rho_l2, row.err_rho_l2, prev.h, row.h);
        }
        study.levels.push_back(row);
    }
    return study;
}

void write_csv(std::ostream& os, const ConvergenceStudy& s) {
    const auto old = os.precision(17);
    os << "level,h,err_u_l2,err_u_h1,err_rho_l2,err_p_l2,order_u,order_rho\n";
    for (const auto& r : s.levels)
        os << r.level << ',' << r.h << ',' << r.err_u_l2 << ',' << r.err_u_h1 << ',' << r.err_rho_l2 << ','
           << r.err_p_l2 << ',' << r.order_u << ',' << r.order_rho << "\n";
    os.precision(old);
}

StabilityTable probe_stability_constants(const DomainSpec& domain, const std::vector<int>& cells,
                                         const SchemeParams& params, const SolverConfig& config) {
    StabilityTable t;
    for (int n : cells) {
        const MacGrid g = build_grid(domain, Refinement::uniform(n));
        const SolveReport rep = solve(g, params, config);
        StabilityRow r;
        r.cells = n;
        r.h = g.mesh_size();
        r.solved = rep.success;
        r.h1_u = rep.h1_u;
        r.l2_p = rep.l2_p;
        r.l2gamma_rho = rep.l2gamma_rho;
        r.weak_bv_2 = weak_bv_sum(g, rep.state.rho, rep.state.u, 2.0);
        r.weak_bv_gamma = weak_bv_sum(g, rep.state.rho, rep.state.u, params.gamma);
        const double q = g.dimension() == 2 ? 4.0 : 6.0;
        r.sobolev_ratio = r.h1_u > 0.0 ? lq_norm(g, rep.state.u, q) / r.h1_u : 0.0;
        t.rows.push_back(r);
    }
    t.bounded = !t.rows.empty();
    for (const auto& r : t.rows) t.bounded = t.bounded && r.solved;
    if (t.rows.size() >= 2) {
        const StabilityRow& a = t.rows[t.rows.size() - 2];
        const StabilityRow& b = t.rows.back();
        const auto change = [](double x, double y) {
            if (x == 0.0) return y == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            return (y - x) / std::abs(x);
        };
        const double c[] = {change(a.h1_u, b.h1_u), change(a.l2_p, b.l2_p), change(a.l2gamma_rho, b.l2gamma_rho),
                            change(a.weak_bv_2, b.weak_bv_2)};
        for (double v : c) {
            t.max_growth = std::max(t.max_growth, v);
            t.max_variation = std::max(t.max_variation, std::abs(v));
        }
        t.bounded = t.bounded && t.max_growth < 0.1;
    }
    return t;
}

void write_csv(std::ostream& os, const StabilityTable& t) {
    const auto old = os.precision(17);
    os << "cells,h,solved,h1_u,l2_p,l2gamma_rho,weak_bv_2,weak_bv_gamma,sobolev_ratio\n";
    for (const auto& r : t.rows)
        os << r.cells << ',' << r.h << ',' << (r.solved ? 1 : 0) << ',' << r.h1_u << ',' << r.l2_p << ','
           << r.l2gamma_rho << ',' << r.weak_bv_2 << ',' << r.weak_bv_gamma << ',' << r.sobolev_ratio << "\n";
    os.precision(old);
}

}  // namespace macns
