#include "macns/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace macns {

ConfigError::ConfigError(int line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

namespace {

const char* const kKeys[] = {"domain.dimension", "domain.boxes",     "grid.cells_per_axis", "grid.lines_axis1",
                             "grid.lines_axis2", "grid.lines_axis3", "phys.gamma",          "phys.mu",
                             "phys.lambda",      "phys.mass",        "scheme.cs",           "scheme.alpha",
                             "force.kind",       "force.vector",     "solver.zeta_schedule", "solver.picard_tol",
                             "solver.max_iters", "solver.relaxation", "study.levels",       "study.mode"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

struct Entry {
    std::string value;
    int line = 0;
};

class Reader {
public:
    Reader(const std::string& key, const Entry& e) : key_(key), e_(e) {}

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(e_.line, key_ + " " + what); }

    double real(const std::string& text) const {
        const std::string t = trim(text);
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(t.c_str(), &end);
        if (t.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
            fail("expects a real number, got '" + t + "'");
        return v;
    }
    double real() const { return real(e_.value); }

    long integer(const std::string& text) const {
        const std::string t = trim(text);
        char* end = nullptr;
        errno = 0;
        const long v = std::strtol(t.c_str(), &end, 10);
        if (t.empty() || *end != '\0' || errno == ERANGE) fail("expects an integer, got '" + t + "'");
        return v;
    }
    long integer() const { return integer(e_.value); }

    std::vector<double> reals() const {
        std::vector<double> v;
        for (const auto& s : split(e_.value, ',')) v.push_back(real(s));
        return v;
    }

private:
    std::string key_;
    Entry e_;
};

// Shortest text that parses back to the same double.
std::string num(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
    return s;
}

SchemeParams physical_params(const RunConfig& c) {
    SchemeParams p;
    p.gamma = c.gamma;
    p.mu = c.mu;
    p.lambda = c.lambda;
    p.mass = c.mass;
    p.cs = c.cs;
    p.alpha = c.alpha;
    return p;
}

// Maps a ParamError message "name = value ..." to the key that set name.
std::string key_of_param_message(const std::string& msg) {
    static const std::map<std::string, std::string> keys{{"mu", "phys.mu"},     {"lambda", "phys.lambda"},
                                                         {"gamma", "phys.gamma"}, {"mass", "phys.mass"},
                                                         {"cs", "scheme.cs"},     {"alpha", "scheme.alpha"}};
    const auto it = keys.find(msg.substr(0, msg.find(' ')));
    return it == keys.end() ? "" : it->second;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    std::map<std::string, Entry> entries;
    std::vector<std::string> order;
    {
        std::istringstream is(text);
        std::string raw;
        int line = 0;
        while (std::getline(is, raw)) {
            ++line;
            const std::string s = trim(raw.substr(0, raw.find('#')));
            if (s.empty()) continue;
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError(line, "expected `section.key = value`, got '" + s + "'");
            const std::string key = trim(s.substr(0, eq));
            if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys))
                throw ConfigError(line, "unknown key '" + key + "'");
            if (entries.count(key)) throw ConfigError(line, "duplicate key '" + key + "'");
            entries[key] = {trim(s.substr(eq + 1)), line};
            order.push_back(key);
        }
    }
    const auto line_of = [&](const std::string& key) { return entries.count(key) ? entries.at(key).line : 0; };

    RunConfig c;
    if (entries.count("domain.dimension")) {
        const Reader r("domain.dimension", entries.at("domain.dimension"));
        const long d = r.integer();
        if (d != 2 && d != 3) r.fail("must be 2 or 3, got " + std::to_string(d));
        c.domain = d == 2 ? DomainSpec::unit_square() : DomainSpec::unit_cube();
    }
    const int d = c.domain.dimension;
    bool cells_given = false;
    std::array<bool, 3> lines_given{false, false, false};

    for (const std::string& key : order) {
        const Entry& e = entries.at(key);
        const Reader r(key, e);
        if (key == "domain.dimension") continue;
        if (key == "domain.boxes") {
            c.domain.boxes.clear();
            for (const std::string& item : split(e.value, ';')) {
                const std::vector<double> v = Reader(key, Entry{item, e.line}).reals();
                if (static_cast<int>(v.size()) != 2 * d)
                    r.fail("box '" + item + "' needs " + std::to_string(2 * d) + " coordinates");
                Box b;
                for (int a = 0; a < d; ++a) {
                    b.lo[a] = v[2 * a];
                    b.hi[a] = v[2 * a + 1];
                    if (!(b.lo[a] < b.hi[a])) r.fail("box '" + item + "' has lo >= hi on axis " + std::to_string(a + 1));
                }
                c.domain.boxes.push_back(b);
            }
        } else if (key == "grid.cells_per_axis") {
            cells_given = true;
            const std::vector<std::string> parts = split(e.value, ',');
            if (parts.size() != 1 && static_cast<int>(parts.size()) != d)
                r.fail("expects one count or " + std::to_string(d) + " counts");
            std::array<int, 3> n{0, 0, 0};
            for (std::size_t a = 0; a < parts.size(); ++a) {
                const long v = r.integer(parts[a]);
                if (v < 1 || v > 4096) r.fail("count " + std::to_string(v) + " is outside [1, 4096]");
                n[a] = static_cast<int>(v);
            }
            c.refinement = parts.size() == 1 ? Refinement::uniform(n[0]) : Refinement::uniform(n);
        } else if (key.rfind("grid.lines_axis", 0) == 0) {
            const int a = key.back() - '1';
            if (a >= d) r.fail("is not available in dimension " + std::to_string(d));
            lines_given[a] = true;
            std::vector<double> v = r.reals();
            if (v.size() < 2) r.fail("needs at least two coordinates");
            for (std::size_t i = 1; i < v.size(); ++i)
                if (!(v[i - 1] < v[i])) r.fail("coordinates must be strictly increasing");
            c.refinement.cells = {0, 0, 0};
            c.refinement.lines[a] = std::move(v);
        } else if (key == "phys.gamma") {
            c.gamma = r.real();
        } else if (key == "phys.mu") {
            c.mu = r.real();
        } else if (key == "phys.lambda") {
            c.lambda = r.real();
        } else if (key == "phys.mass") {
            c.mass = r.real();
        } else if (key == "scheme.cs") {
            if (e.value == "auto")
                c.cs.reset();
            else
                c.cs = r.real();
        } else if (key == "scheme.alpha") {
            c.alpha = r.real();
        } else if (key == "force.kind") {
            const std::string& v = e.value;
            if (v == "constant") {
                c.force.kind = ForceSpec::Kind::constant;
            } else if (v == "gravity") {
                c.force.kind = ForceSpec::Kind::gravity;
            } else if (v == "rho-gravity") {
                c.force.kind = ForceSpec::Kind::rho_gravity;
            } else if (v.rfind("mms:", 0) == 0 && v.size() > 4) {
                c.force.kind = ForceSpec::Kind::mms;
                c.force.argument = v.substr(4);
            } else if (v.rfind("file:", 0) == 0 && v.size() > 5) {
                c.force.kind = ForceSpec::Kind::file;
                c.force.argument = v.substr(5);
            } else {
                r.fail("must be constant, gravity, rho-gravity, mms:<preset> or file:<path>, got '" + v + "'");
            }
        } else if (key == "force.vector") {
            const std::vector<double> v = r.reals();
            if (static_cast<int>(v.size()) != d) r.fail("needs " + std::to_string(d) + " components");
            c.force.vector = {0.0, 0.0, 0.0};
            for (int a = 0; a < d; ++a) c.force.vector[a] = v[a];
        } else if (key == "solver.zeta_schedule") {
            c.solver.zeta_schedule = r.reals();
        } else if (key == "solver.picard_tol") {
            c.solver.picard_tol = r.real();
        } else if (key == "solver.max_iters") {
            const long v = r.integer();
            if (v < 1) r.fail("must be at least 1");
            c.solver.picard_max_iters = static_cast<int>(v);
        } else if (key == "solver.relaxation") {
            c.solver.relaxation = r.real();
        } else if (key == "study.levels") {
            const long v = r.integer();
            if (v < 3 || v > 8) r.fail("must lie in [3, 8]");
            c.study_levels = static_cast<int>(v);
        } else if (key == "study.mode") {
            if (e.value == "mms")
                c.study_mode = StudyMode::mms;
            else if (e.value == "reference")
                c.study_mode = StudyMode::reference;
            else
                r.fail("must be mms or reference, got '" + e.value + "'");
        }
    }

    const bool any_lines = lines_given[0] || lines_given[1] || lines_given[2];
    if (any_lines && cells_given)
        throw ConfigError(line_of("grid.cells_per_axis"), "grid.cells_per_axis and grid.lines_axis* are exclusive");
    if (any_lines) {
        for (int a = 0; a < d; ++a)
            if (!lines_given[a])
                throw ConfigError(0, "grid.lines_axis" + std::to_string(a + 1) + " is missing");
    }

    try {
        validate(physical_params(c), d);
    } catch (const ParamError& e) {
        throw ConfigError(line_of(key_of_param_message(e.what())), e.what());
    }
    try {
        validate(c.solver);
    } catch (const ParamError& e) {
        throw ConfigError(0, std::string("solver: ") + e.what());
    }
    try {
        (void)build_grid(c.domain, c.refinement);
    } catch (const GridError& e) {
        throw ConfigError(line_of("domain.boxes"), std::string("grid: ") + e.what());
    }
    if (c.force.kind == ForceSpec::Kind::mms) {
        try {
            (void)mms_preset(c.force.argument, physical_params(c), c.domain);
        } catch (const ParamError& e) {
            throw ConfigError(line_of("force.kind"), e.what());
        }
    }
    if (c.study_mode == StudyMode::mms && c.force.kind != ForceSpec::Kind::mms)
        throw ConfigError(line_of("study.mode"), "study.mode = mms needs force.kind = mms:<preset>");
    if (d == 3 && c.gamma <= 3.0)
        c.warnings.push_back("gamma = " + num(c.gamma) +
                             " with dimension 3: the convergence theory of the scheme requires gamma > 3");
    return c;
}

std::string render(const RunConfig& c) {
    const int d = c.domain.dimension;
    std::ostringstream os;
    os << "domain.dimension = " << d << "\n";
    os << "domain.boxes = ";
    for (std::size_t k = 0; k < c.domain.boxes.size(); ++k) {
        std::vector<double> v;
        for (int a = 0; a < d; ++a) {
            v.push_back(c.domain.boxes[k].lo[a]);
            v.push_back(c.domain.boxes[k].hi[a]);
        }
        os << (k ? ";" : "") << join(v);
    }
    os << "\n";
    if (c.refinement.explicit_lines()) {
        for (int a = 0; a < d; ++a) os << "grid.lines_axis" << a + 1 << " = " << join(c.refinement.lines[a]) << "\n";
    } else {
        const auto& n = c.refinement.cells;
        os << "grid.cells_per_axis = ";
        if (n[0] == n[1] && n[1] == n[2]) {
            os << n[0];
        } else {
            for (int a = 0; a < d; ++a) os << (a ? "," : "") << n[a];
        }
        os << "\n";
    }
    os << "phys.gamma = " << num(c.gamma) << "\n";
    os << "phys.mu = " << num(c.mu) << "\n";
    os << "phys.lambda = " << num(c.lambda) << "\n";
    os << "phys.mass = " << num(c.mass) << "\n";
    os << "scheme.cs = " << (c.cs ? num(*c.cs) : "auto") << "\n";
    os << "scheme.alpha = " << num(c.alpha) << "\n";
    os << "force.kind = ";
    switch (c.force.kind) {
        case ForceSpec::Kind::constant: os << "constant"; break;
        case ForceSpec::Kind::gravity: os << "gravity"; break;
        case ForceSpec::Kind::rho_gravity: os << "rho-gravity"; break;
        case ForceSpec::Kind::mms: os << "mms:" << c.force.argument; break;
        case ForceSpec::Kind::file: os << "file:" << c.force.argument; break;
    }
    os << "\n";
    os << "force.vector = " << join(std::vector<double>(c.force.vector.begin(), c.force.vector.begin() + d)) << "\n";
    os << "solver.zeta_schedule = " << join(c.solver.zeta_schedule) << "\n";
    os << "solver.picard_tol = " << num(c.solver.picard_tol) << "\n";
    os << "solver.max_iters = " << c.solver.picard_max_iters << "\n";
    os << "solver.relaxation = " << num(c.solver.relaxation) << "\n";
    os << "study.levels = " << c.study_levels << "\n";
    os << "study.mode = " << (c.study_mode == StudyMode::mms ? "mms" : "reference") << "\n";
    return os.str();
}

MacGrid make_grid(const RunConfig& c) { return build_grid(c.domain, c.refinement); }

std::vector<Point> read_cell_vectors(const std::string& path, int dimension, int cells) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path + ": " + std::strerror(errno));
    std::string line;
    std::getline(in, line);
    std::vector<Point> out;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::vector<std::string> parts = split(line, ',');
        if (static_cast<int>(parts.size()) != dimension + 1)
            throw ParamError(path + ":" + std::to_string(row) + ": expected id and " + std::to_string(dimension) +
                             " components");
        const Reader r(path + ":" + std::to_string(row), Entry{line, row});
        if (r.integer(parts[0]) != static_cast<long>(out.size()))
            throw ParamError(path + ":" + std::to_string(row) + ": cell ids must be 0, 1, 2, ... in order");
        Point p{0, 0, 0};
        for (int a = 0; a < dimension; ++a) p[a] = r.real(parts[a + 1]);
        out.push_back(p);
    }
    if (static_cast<int>(out.size()) != cells)
        throw ParamError(path + " has " + std::to_string(out.size()) + " cells, the grid has " + std::to_string(cells));
    return out;
}

SchemeParams scheme_params(const RunConfig& c, const MacGrid& g) {
    SchemeParams p = physical_params(c);
    switch (c.force.kind) {
        case ForceSpec::Kind::constant:
        case ForceSpec::Kind::gravity:
            p.forcing = Forcing::constant_vector(c.force.vector);
            break;
        case ForceSpec::Kind::rho_gravity:
            p.forcing = Forcing::rho_gravity(c.force.vector);
            break;
        case ForceSpec::Kind::mms: {
            const MmsProblem m = mms_preset(c.force.argument, p, c.domain);
            p.forcing = Forcing::analytic(m.f);
            p.forcing.mass_source = m.g;
            break;
        }
        case ForceSpec::Kind::file:
            try {
                p.forcing = Forcing::sampled(read_cell_vectors(c.force.argument, g.dimension(), g.num_cells()));
            } catch (const std::runtime_error& e) {
                throw ConfigError(0, e.what());
            }
            break;
    }
    return p;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string() + ": " + std::strerror(errno));
    out << content;
    if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

template <class F>
std::string to_string(F&& write) {
    std::ostringstream os;
    write(os);
    return os.str();
}

int run_solve(const RunConfig& c, const std::filesystem::path& out, std::ostream& log) {
    const MacGrid g = make_grid(c);
    const SchemeParams p = scheme_params(c, g);
    const SolveReport rep = solve(g, p, c.solver);
    write_file(out / "report.txt", to_string([&](std::ostream& os) {
                   for (const auto& w : c.warnings) os << "config_warning: " << w << "\n";
                   write_report(os, rep);
               }));
    if (!rep.state.u.components.empty() && rep.state.rho.values.size() > 0) {
        write_file(out / "rho.csv", to_string([&](std::ostream& os) { write_csv(os, g, rep.state.rho); }));
        write_file(out / "p.csv", to_string([&](std::ostream& os) { write_csv(os, g, pressure(rep.state, p)); }));
        for (int i = 0; i < g.dimension(); ++i)
            write_file(out / ("u" + std::to_string(i + 1) + ".csv"),
                       to_string([&](std::ostream& os) { write_csv(os, g, rep.state.u[i]); }));
    }
    log << (rep.success ? "solve converged" : "solve failed: " + rep.message) << "\n";
    return rep.success ? 0 : 1;
}

int run_verify(const RunConfig& c, const std::filesystem::path& out, std::ostream& log) {
    const MacGrid g = make_grid(c);
    const IdentityReport rep = run_identity_suite(g, 50, c.seed);
    write_file(out / "report.txt", to_string([&](std::ostream& os) { write_report(os, rep); }));
    const bool ok = all_within_tolerance(rep);
    log << (ok ? "all identities within tolerance" : "some identity exceeds its tolerance") << "\n";
    return ok ? 0 : 1;
}

int run_study(const RunConfig& c, const std::filesystem::path& out, std::ostream& log) {
    if (c.refinement.explicit_lines()) throw ConfigError(0, "study needs grid.cells_per_axis");
    StudySpec spec;
    spec.mode = c.study_mode;
    spec.domain = c.domain;
    spec.base_cells = c.refinement.cells;
    spec.levels = c.study_levels;
    SchemeParams p = physical_params(c);
    if (c.study_mode == StudyMode::mms) {
        spec.problem = mms_preset(c.force.argument, p, c.domain);
    } else {
        if (c.force.kind == ForceSpec::Kind::file || c.force.kind == ForceSpec::Kind::mms)
            throw ConfigError(0, "reference study needs a constant, gravity or rho-gravity force");
        p = scheme_params(c, make_grid(c));
    }
    const ConvergenceStudy st = run_convergence_study(spec, p, c.solver);
    write_file(out / "study.csv", to_string([&](std::ostream& os) { write_csv(os, st); }));
    write_file(out / "report.txt", to_string([&](std::ostream& os) {
                   os << "study_mode: " << st.mode << "\ncomplete: " << (st.complete ? 1 : 0) << "\n";
                   for (const auto& l : st.levels)
                       if (!l.note.empty()) os << "level." << l.level << ".note: " << l.note << "\n";
               }));
    log << (st.complete ? "study complete" : "study incomplete") << "\n";
    return st.complete ? 0 : 1;
}

}  // namespace

int run(const RunConfig& c, std::ostream& log) {
    for (const auto& w : c.warnings) log << "warning: " << w << "\n";
    try {
        const std::filesystem::path out(c.out_dir);
        std::filesystem::create_directories(out);
        switch (c.command) {
            case Command::solve: return run_solve(c, out, log);
            case Command::verify: return run_verify(c, out, log);
            case Command::study: return run_study(c, out, log);
        }
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParamError& e) {
        log << "config error: " << e.what() << "\n";
        return 2;
    } catch (const GridError& e) {
        log << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        log << "solver error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        log << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace macns
