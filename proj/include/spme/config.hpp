#pragma once

// Declarative experiment configuration: a small key-value file format with
// [section] tables (numbers, strings, booleans, arrays), plus the three
// shipped presets.

#include "spme/basis.hpp"
#include "spme/integrator.hpp"
#include "spme/model.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace spme {

struct ExperimentConfig {
    // [basis]
    BasisKind kind = BasisKind::dirichlet_sine;
    int n_modes = 16;
    int n_quad = 0;  // 0 = default oversampling
    SpectralMap map = SpectralMap::identity();

    // [model]
    double r = 2.0;
    double theta = 1.0;
    double delta = 1.0;
    double xi = 1.0;
    double gamma = 0.0;
    double q_value = 1.0;

    // [run]
    double horizon = 1.0;
    double dt = 1e-4;
    std::uint64_t seed = 42;
    int n_paths = 10000;
    bool taming = true;
    double tol_coal = 1e-6;
    double beta_safety = 1.05;

    std::vector<std::string> suites;
    std::string out_dir = "out";

    std::string name = "custom";

    // Throws std::invalid_argument naming the first violated constraint.
    void validate() const;

    EigenBasis make_basis() const;
    ModelSpec make_spec() const;
    PathConfig make_run() const;

    // Resolved key = value pairs, fixed order; embedded in every report.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Shipped presets.
ExperimentConfig porous_default();
ExperimentConfig hermite_ou_config();
ExperimentConfig linear_oracle();

const std::vector<std::string>& known_suites();

} // namespace spme
