#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nbsym/loops.hpp"

namespace nbsym {

struct MinimizeConfig {
    int samples = 256;
    int max_iterations = 20000;
    double gradient_tolerance = 1e-8;
    double intermediate_tolerance = 1e-4;
    std::uint64_t seed = 1;
    int fourier_mode_cap = 3;
    std::vector<double> mollifier_schedule = {0.05, 0.01, 0.002, 0.0};
    double sufficient_decrease = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 50;
    int memory = 10;
    std::optional<Eigen::MatrixXd> rotating_frame;
};

struct MinimizeResult {
    Loop loop;
    ActionReport report;
    double equivariance = 0.0;
    double gradient_norm = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> action_history;
    double initial_inertia = 0.0;
    double final_inertia = 0.0;
    bool inertia_growing = false;
    std::string message;
};

// Random equivariant trigonometric seed: modes <= cap, centered, projected,
// normalized to unit mean inertia. Deterministic in config.seed.
Loop seed_loop(const GroupAction& action, const MinimizeConfig& config);

MinimizeResult minimize_action(const GroupAction& action, const MinimizeConfig& config);
MinimizeResult minimize_from(const GroupAction& action, const MinimizeConfig& config,
                             const Loop& start);

struct SeedCluster {
    double action = 0.0;
    int count = 0;
    std::vector<std::uint64_t> seeds;
    bool converged = false;
};

struct MultiSeedResult {
    MinimizeResult best;
    std::vector<SeedCluster> clusters;
};
// Runs seeds config.seed .. config.seed+count-1, clusters converged runs by
// action value (relative tolerance 1e-4), returns the lowest-action one.
MultiSeedResult multi_seed(const GroupAction& action, const MinimizeConfig& config,
                           int count);

// Central second difference of the action along v with Richardson step halving.
double hessian_quadratic_form(const Loop& x, const Loop& v, double alpha,
                              double h = 1e-3);

} // namespace nbsym
