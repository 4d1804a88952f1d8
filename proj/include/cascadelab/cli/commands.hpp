#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cascadelab/cascade.hpp"
#include "cascadelab/cli/config.hpp"
#include "cascadelab/cli/output.hpp"
#include "cascadelab/generators.hpp"
#include "cascadelab/graph.hpp"
#include "cascadelab/theory.hpp"
#include "cascadelab/time_series.hpp"

namespace cascadelab::cli {

// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "CASCADELAB_OUT";

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitNumerical = 3, kExitIo = 4 };

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::filesystem::path> out_dir;
    bool svg = false;
    // Raw config bytes and origin, recorded in the manifest.
    std::string config_text;
    std::filesystem::path config_path;
};

struct CommandResult {
    std::filesystem::path out_dir;
    std::vector<std::filesystem::path> files;
    // False when an iterative solve did not converge; outputs are still written.
    bool converged = true;
};

// --out, then output.dir, then $CASCADELAB_OUT, then ./cascadelab_out.
std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg, const RunOptions& opts);

// Effective run settings after command-line overrides.
SimConfig effective_run(const ExperimentConfig& cfg, const RunOptions& opts);

// Graph for one realization; `index` selects the generator stream.
Graph build_graph(const NetworkConfig& net, std::uint64_t master_seed, std::size_t index,
                  GeneratorReport* report = nullptr);

// Tree-approximation inputs for the configured network.
ModelInputs theory_inputs(const ExperimentConfig& cfg);

// Reduced-map scenario for uncorrelated networks; ConfigError for correlated ones.
Scenario cascade_scenario(const ExperimentConfig& cfg);

// Ensemble simulation of the configured scenario.
TimeSeries simulate(const ExperimentConfig& cfg, const SimConfig& run);

// Theory time series of the configured scenario (ODE on the run grid, or
// map iterations 0..theory.steps). `converged` reports map convergence.
TimeSeries theory_series(const ExperimentConfig& cfg, bool* converged = nullptr);

// Columns t, rho1, rho2, rho1_k<k>..., rho2_k<k>...
CsvTable series_table(const TimeSeries& ts);

// t, then sim_/theory_/gap_ triples for rho1, rho2 and every degree class present in both.
CsvTable overlay_table(const TimeSeries& sim, const TimeSeries& theory);

CommandResult cmd_generate(const ExperimentConfig& cfg, const RunOptions& opts);
CommandResult cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opts);
CommandResult cmd_theory(const ExperimentConfig& cfg, const RunOptions& opts);
CommandResult cmd_cascade(const ExperimentConfig& cfg, const RunOptions& opts);

// Exit code for an exception escaping a command; `message` receives a one-line description.
int exit_code_for(std::exception_ptr error, std::string* message = nullptr);

// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace cascadelab::cli
