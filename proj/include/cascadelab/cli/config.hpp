#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "cascadelab/cascade.hpp"
#include "cascadelab/degree_distribution.hpp"
#include "cascadelab/response.hpp"
#include "cascadelab/simulation.hpp"

namespace cascadelab::cli {

enum class NetworkKind { ErdosRenyi, Configuration, Correlated, EdgeList };

struct NetworkConfig {
    NetworkKind kind = NetworkKind::ErdosRenyi;
    std::size_t nodes = 0;
    double mean_degree = 0.0;
    // Configuration model: relative weight per degree.
    std::map<std::size_t, double> degree_weights;
    // Correlated: unordered (k, k', weight) entries.
    std::vector<std::tuple<std::size_t, std::size_t, double>> joint;
    // Edge list, relative to the config file.
    std::filesystem::path path;
    // Draw a fresh graph for every realization.
    bool resample = true;
};

enum class TheoryMethod { Ode, Map };

struct TheoryConfig {
    TheoryMethod method = TheoryMethod::Ode;
    double dt = 0.01;
    // Map method: iterations written (states 0..steps).
    std::size_t steps = 100;
    // Also simulate and write theory - simulation gaps at matched times.
    bool overlay = false;
};

struct CascadeConfig {
    bool condition = true;
    std::optional<Axis> x;
    std::optional<Axis> y;
    bool continuation = false;
};

struct OutputConfig {
    std::filesystem::path dir;
    bool svg = false;
};

struct ExperimentConfig {
    std::string name = "experiment";
    NetworkConfig network;
    ResponseSpec response;
    SimConfig run;
    TheoryConfig theory;
    CascadeConfig cascade;
    OutputConfig output;

    // Throws ConfigError describing the first violated rule.
    void validate() const;
};

// Parses a YAML document. Unknown keys and type mismatches are ConfigErrors.
// Relative paths inside the document resolve against base_dir.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

// Reads and parses a config file; IoError when it cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

std::string network_kind_name(NetworkKind kind);

}  // namespace cascadelab::cli
