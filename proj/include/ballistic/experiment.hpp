#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ballistic/instances.hpp"
#include "ballistic/reconstruct.hpp"
#include "ballistic/solver.hpp"

namespace ballistic {

/// Malformed or inconsistent experiment configuration (exit code 1).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct FourierTerm {
    int component = 0;
    std::vector<int> k;  // one wavenumber per axis
    double cos = 0.0;
    double sin = 0.0;
};

/// Initial data: a named preset ("sine", "taylor_green", "constant", "random"),
/// per-atom "values", or a "fourier" coefficient list.
struct InitialData {
    std::string kind = "sine";
    double amplitude = 1.0;
    double magnetic_amplitude = 0.0;  // MHD taylor_green: b = m (-sin y, sin x)
    double constant = 0.0;
    std::vector<double> values;
    std::vector<FourierTerm> fourier;
    std::uint64_t seed = 0;
    int cutoff = 4;
};

struct ExperimentConfig {
    std::string name;
    std::string instance;
    std::vector<std::size_t> grid;  // torus sizes; empty for atom spaces
    std::vector<double> weights;    // atom weights; empty means uniform
    std::size_t atoms = 0;
    double T = 1.0;
    int steps = 64;
    InitialData initial;
    SolverConfig solver;
    bool reconstruct = true;
    bool use_oracle = true;
    bool dump_fields = false;
    bool consistency_solve = true;  // consistency mode also runs the optimizer
    std::string sweep_parameter;    // "T" or "amplitude"
    std::vector<double> sweep_values;
    std::string output = "ballistic_out";
    std::uint64_t seed = 0;

    /// Throws ConfigError on unknown instances, T <= 0, steps < 2 and similar.
    void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

SpaceHandle build_space(const ExperimentConfig& cfg);
VectorFieldd build_initial(const OperatorInstance& inst, const InitialData& init);

/// Strong-solution oracle for the configured data when one is known: ODE atoms with
/// T v0 + 2 > 0, Burgers (up to 0.95 of the shock time), stationary Taylor-Green and constant KdV.
std::optional<StrongOracle> find_oracle(const ExperimentConfig& cfg, const OperatorInstance& inst,
                                        const VectorFieldd& v0);

struct SolveOutcome {
    OperatorInstance instance;
    TimeGrid grid{1.0, 2};
    VectorFieldd v0;
    SolveResult result;
    std::optional<ReconstructionReport> reconstruction;
    std::optional<StrongOracle> oracle;
    bool bound_applies = false;  // conservative instance
    bool bound_holds = true;     // J <= T K0 (1 + 1e-6) when the bound applies and the run converged
};

SolveOutcome solve_experiment(const ExperimentConfig& cfg);

struct ConsistencyOutcome {
    SolveReport pair;
    double residual_r = 0.0;
    double min_eigenvalue = 0.0;
    double B_match = 0.0;  // max_k ||B_k - (T - t_k) L* u(t_k)||
    std::optional<SolveOutcome> solve;
};

/// Throws OracleRefused when the cone condition fails for the oracle on [0, T].
ConsistencyOutcome consistency_experiment(const ExperimentConfig& cfg);

struct VerifyOutcome {
    std::vector<CheckReport> checks;
    bool passed = true;
};

VerifyOutcome verify_experiment(const ExperimentConfig& cfg, int trials = 20);

/// Subcommand drivers: write artifacts under cfg.output and return the exit code
/// (0 converged or passed, 2 not converged, 3 oracle refused).
int run_solve(const ExperimentConfig& cfg, std::ostream& log);
int run_verify(const ExperimentConfig& cfg, std::ostream& log);
int run_sweep(const ExperimentConfig& cfg, std::ostream& log);
int run_consistency(const ExperimentConfig& cfg, std::ostream& log);

/// Loads the config and dispatches; configuration problems return 1 without artifacts.
int run_command(const std::string& command, const std::string& config_path,
                const std::optional<std::string>& output_override, std::ostream& log, std::ostream& err);

/// Raw field dump: "BALLISTC", u64 array count, then per array a u64 name length, the
/// name, u64 rank, u64 dims and little-endian f64 values in row-major order.
void write_fields(const std::string& path, const OperatorInstance& inst, const DualVariables& dual,
                  const FieldSeries& v);

}  // namespace ballistic
