#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nbsym/group.hpp"
#include "nbsym/loops.hpp"

namespace nbsym {

// Facts about each built-in action that the analysis must reproduce.
struct ExpectedFacts {
    bool coercive = true;
    ActionType action_type = ActionType::cyclic;
    bool rcp_maximal = true;       // rotating circle property on maximal T-isotropies
    bool rcp_kertau = true;
    bool theorem_applicable = true;  // existence theorem: each maximal T-isotropy has RCP or acts trivially
    bool boundary_collisions_unresolved = false;
};

struct CatalogEntry {
    std::string name;
    std::string description;
    std::map<std::string, double> default_params;  // includes "alpha"
    ExpectedFacts expected;
};

std::vector<CatalogEntry> catalog_entries();
const CatalogEntry& catalog_entry(const std::string& name);

// params may override entries from default_params (n, k, q, p, alpha)
GroupAction catalog_build(const std::string& name,
                          const std::map<std::string, double>& params = {});

// Rotating equilateral triangle reference orbit: angular velocity 3 - 2k,
// period 2 pi, three unit masses, radius (alpha 3^{-alpha/2} / (2 (3-2k)^2))^{1/(2+alpha)}.
// This is the radius the catalog's quadratic-form values are computed at; it sits
// a factor 2^{1/(2+alpha)} below the radius that makes the orbit Newton-stationary,
// so its Newton residual is 0.5 by construction (see README).
Loop lagrange_reference(int k, double alpha, int M = 512);

// generalized variant: angular velocity p - 2k (p = 3 recovers lagrange_reference)
Loop lagrange_reference_p(int p, int k, double alpha, int M = 512);

// Vertical variation v_i = (0, 0, sin(k t + phase_i)) with the equivariant
// phase assignment (0, 2pi/3, -2pi/3); the profile obeys phi(t + 3 pi / k) = -phi(t).
Loop vertical_variation(int k, int M);

double lagrange_reference_radius(int k, double alpha);
double lagrange_reference_radius_p(int p, int k, double alpha);

} // namespace nbsym
