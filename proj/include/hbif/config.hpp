#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hbif/continuation.hpp"
#include "hbif/model.hpp"

namespace hbif {

// CLI/file configuration. Serialized as nested JSON; absent keys keep the
// defaults below.
struct Config {
    int grid_n = 199;

    double model_M = 1.0;
    double model_kappa = 1.0;
    int model_p = 3;
    std::vector<std::pair<int, double>> h_modes = {{2, -1.0}};

    double newton_tol = 1e-10;
    int max_iterations = 40;
    double damping_min = 1.0 / 64.0;

    double ds0 = 0.02;
    double ds_min = 1e-6;
    double ds_max = 0.2;
    double tol_deg = 1e-8;
    double c_switch_factor = 0.1;

    std::string verify_level = "full";
    unsigned seed = 12345;

    bool operator==(const Config&) const = default;
};

Config load_config(const std::string& path);
void save_config(const Config& config, const std::string& path);
std::string config_to_json(const Config& config);
Config config_from_json(const std::string& text);

// Short stable digest of the serialized config (for report headers).
std::string config_digest(const Config& config);

SolverConfig solver_config(const Config& config);
StepConfig step_config(const Config& config);
Problem problem_from_config(const Config& config);

} // namespace hbif
