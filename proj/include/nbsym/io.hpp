#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nbsym/loops.hpp"

namespace nbsym {

// JSON problem description -> closed group action.
GroupAction action_from_json(const nlohmann::json& j);
GroupAction load_action(const std::string& path);
nlohmann::json action_to_json(const GroupAction& action);

std::uint64_t config_hash(const nlohmann::json& j); // FNV-1a over canonical dump

nlohmann::json report_to_json(const ActionReport& report);

// Full group-theoretic analysis (coercivity, type, fundamental domain,
// reducibility, collision bound, rotating circle report) as one object.
nlohmann::json analysis_to_json(const GroupAction& action);

// CSV trajectory (header t, x1_1..x1_d, ..., xn_1..xn_d) plus a .json sidecar
// carrying config hash, alpha, period, sample count, masses, report and the
// group description needed to re-verify.
void write_trajectory(const std::string& csv_path, const Loop& loop,
                      const GroupAction& action, const ActionReport& report);

struct TrajectoryFile {
    Loop loop;
    nlohmann::json sidecar;
};
TrajectoryFile read_trajectory(const std::string& csv_path);

struct VerifyOutcome {
    ActionReport report;
    double equivariance = 0.0;
    double centering = 0.0;
    bool pass = false;
    std::vector<std::string> failures;
};
VerifyOutcome verify_trajectory(const std::string& csv_path);

} // namespace nbsym
