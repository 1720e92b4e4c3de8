#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "macns/diagnostics.hpp"

namespace macns {

/// Parse or validation failure. line() is 1-based, 0 when the problem is not tied to one line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

enum class Command { solve, verify, study };

struct ForceSpec {
    enum class Kind { constant, gravity, rho_gravity, mms, file };
    Kind kind = Kind::constant;
    Point vector{0.0, 0.0, 0.0};
    /// mms preset name or sampled-force file path.
    std::string argument;

    bool operator==(const ForceSpec&) const = default;
};

struct RunConfig {
    Command command = Command::solve;
    DomainSpec domain = DomainSpec::unit_square();
    Refinement refinement = Refinement::uniform(16);
    double gamma = 1.4;
    double mu = 1.0;
    double lambda = 0.0;
    double mass = 1.0;
    std::optional<double> cs;
    double alpha = 2.0;
    ForceSpec force;
    SolverConfig solver;
    int study_levels = 3;
    StudyMode study_mode = StudyMode::reference;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    std::vector<std::string> warnings;

    bool operator==(const RunConfig&) const = default;
};

/// Flat `section.key = value` lines; `#` starts a comment. Throws ConfigError on the first error.
RunConfig parse_config(const std::string& text);
/// Every config key with its value. Command, output directory and seed are not part of the file.
std::string render(const RunConfig& config);

MacGrid make_grid(const RunConfig& config);
/// Scheme parameters with the forcing of config on g. A file force is read here.
SchemeParams scheme_params(const RunConfig& config, const MacGrid& g);

/// Rows `id,f1,f2[,f3]` after one header line, one row per cell in id order.
std::vector<Point> read_cell_vectors(const std::string& path, int dimension, int cells);

/// Executes config.command, writes report.txt and CSVs into config.out_dir and returns
/// 0 on success, 1 on a solver or identity failure, 2 on a configuration error.
int run(const RunConfig& config, std::ostream& log);

}  // namespace macns
