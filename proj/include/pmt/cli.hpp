#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "pmt/protocols.hpp"

namespace pmt {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum ExitCode { exit_ok = 0, exit_usage = 1, exit_infeasible = 2, exit_degenerate = 3, exit_io = 4 };

// Flat key=value scenario file; '#' starts a comment.
//   n, t_a, t_b, t_e, lambda        setting (lambda is the analytic one)
//   scheme                          F0 | F1 | F2 | F2simple | F3
//   psi, delta_target, epsilon_target
//   trials, master_seed
//   eve_strategy                    uniform | static | omniscient-static
//   eve_paths                       comma-separated, static only
//   lambda_field                    simulation field width, <= 128
//   q1_override                     optional
//   output                          optional CSV path for simulate
struct ScenarioConfig {
    MultipathConfig multipath;
    Scheme scheme = Scheme::F1;
    double psi = 0.1;
    double delta_target = 0.05;
    double epsilon_target = 0.05;
    std::int64_t trials = 100;
    std::uint64_t master_seed = 1;
    EveSpec eve;
    int lambda_field = 16;
    std::optional<BigInt> q1_override;
    std::string output;

    MultipathConfig simulation_config() const;
};

ScenarioConfig parse_config(std::istream& in);  // UsageError on bad keys or values
ScenarioConfig load_config(const std::string& path);  // IoError when unreadable

// 9 significant digits.
std::string format_real(double v);

struct ParamsOptions {
    std::optional<int> analytic_lambda;
    bool json = false;
    bool psi_grid = false;
};

struct SimulateOptions {
    std::optional<std::int64_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<int> lambda_field;
    std::string dump_transcript;  // path for trial 0's transcript
    std::string out;              // CSV path; stdout when empty
    int threads = 0;
    bool audit = false;
};

struct CapacityOptions {
    std::string sweep = "beta";  // beta: t_e = beta n at fixed t_ab; alpha: t_a = t_b = alpha n at fixed t_e
    double lambda = 100;
    int n = 100;
    int points = 200;
    double fixed_fraction = 0.2;  // t_ab / n for beta, t_e / n for alpha
    std::string out;
};

// Each returns an exit code and reports errors on err.
int cmd_params(const ScenarioConfig& cfg, const ParamsOptions& opt, std::ostream& out, std::ostream& err);
int cmd_simulate(const ScenarioConfig& cfg, const SimulateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_capacity(const CapacityOptions& opt, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pmt
