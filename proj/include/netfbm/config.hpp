#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "netfbm/fbm.hpp"
#include "netfbm/linalg.hpp"
#include "netfbm/network.hpp"
#include "netfbm/spatial_operator.hpp"
#include "netfbm/stochastic.hpp"

namespace netfbm {

/// Potential as written in the config: one constant, one value per edge, or
/// sampled values per edge. Exactly one form is active.
struct PotentialConfig {
    enum class Kind { Constant, PerEdge, Sampled } kind = Kind::Constant;
    double constant = 0.0;
    std::vector<double> per_edge;
    std::vector<std::vector<double>> samples;

    friend bool operator==(const PotentialConfig&, const PotentialConfig&) = default;
};

struct DiscretizationConfig {
    int subdivisions = 32;
    double dt = 1e-2;
    double horizon = 1.0;
    double long_horizon = 100.0;
    std::size_t replicates = 2000;

    friend bool operator==(const DiscretizationConfig&, const DiscretizationConfig&) = default;
};

struct StudyConfig {
    std::string name;
    double alpha = 0.2;
    std::vector<double> yosida_n{10.0, 100.0, 1000.0};

    friend bool operator==(const StudyConfig&, const StudyConfig&) = default;
};

struct ExperimentConfig {
    std::vector<Edge> edges;  ///< zero-based internally, 1-based in text
    std::size_t active_count = 1;
    CMatrix b;
    RMatrix c;
    PotentialConfig potential;
    double hurst = 0.75;
    Normalization normalization = Normalization::Standard;
    std::uint64_t seed = 0;
    Formulation formulation = Formulation::Active;
    SampleMethod method = SampleMethod::CirculantEmbedding;
    DiscretizationConfig discretization;
    StudyConfig study;
    std::string output_dir = "out";

    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);
};

/// Study names accepted in [study] name.
[[nodiscard]] const std::vector<std::string>& study_names();

/// Parses INI text. Throws UnknownKey, MissingSection, OutOfRange, ParseError.
[[nodiscard]] ExperimentConfig parse_config(std::string_view text);
/// Throws Io plus the parse errors.
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical text with every default written out; parse_config inverts it exactly.
[[nodiscard]] std::string serialize(const ExperimentConfig& config);

/// Assembled objects described by a config.
struct Model {
    NetworkGraph graph;
    NodeCoupling coupling;
    EdgePotential potential;
    Mesh mesh;
    DiscreteGenerator generator;
};

/// Runs every model-level validation. Throws the network and assembly errors.
[[nodiscard]] Model build_model(const ExperimentConfig& config);

}  // namespace netfbm
