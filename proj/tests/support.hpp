#pragma once

#include <random>
#include <string>
#include <vector>

#include "macns/fields.hpp"

namespace macns::fixtures {

struct NamedGrid {
    std::string name;
    MacGrid grid;
};

inline std::vector<double> graded_lines(double lo, double hi, int n, double ratio) {
    std::vector<double> w(n);
    double total = 0.0;
    for (int k = 0; k < n; ++k) total += (w[k] = std::pow(ratio, k));
    std::vector<double> lines{lo};
    for (int k = 0; k < n; ++k) lines.push_back(lines.back() + (hi - lo) * w[k] / total);
    lines.back() = hi;
    return lines;
}

/// Box, anisotropic, graded, L-shaped and 3D grids.
inline std::vector<NamedGrid> grid_family() {
    std::vector<NamedGrid> out;
    out.push_back({"square-8", build_grid(DomainSpec::unit_square(), Refinement::uniform(8))});
    out.push_back({"aniso-6x11", build_grid(DomainSpec::unit_square(), Refinement::uniform({6, 11, 1}))});
    out.push_back({"graded-7x5", build_grid(DomainSpec::unit_square(),
                                            Refinement::from_lines(graded_lines(0, 1, 7, 1.3),
                                                                    graded_lines(0, 1, 5, 0.7), {}))});
    out.push_back({"lshape-8", build_grid(DomainSpec::l_shape(), Refinement::uniform({8, 4, 1}))});
    {
        DomainSpec l3{3, {Box{{0, 0, 0}, {1, 1, 1}}, Box{{1, 0, 0}, {2, 0.5, 0.5}}}};
        out.push_back({"lshape3d-6", build_grid(l3, Refinement::uniform({6, 4, 4}))});
    }
    out.push_back({"cube-4", build_grid(DomainSpec::unit_cube(), Refinement::uniform(4))});
    out.push_back({"graded-cube", build_grid(DomainSpec::unit_cube(),
                                             Refinement::from_lines(graded_lines(0, 1, 4, 1.4),
                                                                     graded_lines(0, 1, 3, 0.8),
                                                                     graded_lines(0, 1, 5, 1.1)))});
    return out;
}

inline CellField random_cells(const MacGrid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CellField f = zero_cells(g);
    for (int k = 0; k < g.num_cells(); ++k) f.values[k] = u(rng);
    return f;
}

inline VelocityField random_velocity(const MacGrid& g, std::mt19937_64& rng, bool zero_on_boundary = true) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VelocityField v = zero_velocity(g, zero_on_boundary);
    for (int i = 0; i < g.dimension(); ++i)
        for (int s = 0; s < g.num_faces(i); ++s)
            if (!zero_on_boundary || g.face(i, s).interior) v[i].values[s] = u(rng);
    return v;
}

}  // namespace macns::fixtures
