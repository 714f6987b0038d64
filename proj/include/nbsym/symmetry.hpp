#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nbsym/group.hpp"

namespace nbsym {

struct RotatingCircleWitness {
    int index = 0;           // body index the circle rotates for
    Subgroup subgroup;       // the acting subgroup H
    Eigen::VectorXd e1, e2;  // orthonormal basis of the invariant plane
    // angle of rho(g) restricted to span(e1,e2), aligned with subgroup.members
    std::vector<double> rotation_angles;
};

bool coercivity_test(const GroupAction& action);

// Stabilizer of index i inside H.
Subgroup index_isotropy(const Subgroup& H, int i);

// Orbits of H on the index set {0..n-1}.
std::vector<std::vector<int>> homogeneous_orbits(const Subgroup& H);

// Searches for an H-invariant plane, contained in the H_i-fixed subspace of V,
// on which every element of H acts by rotation. Returns a witness or nothing.
std::optional<RotatingCircleWitness> find_rotating_circle(const GroupAction& action,
                                                          const Subgroup& H, int i,
                                                          std::uint64_t seed = 20240601);

struct IsotropyRcp {
    Rational time;              // representative time (fraction of T)
    std::vector<int> subgroup;  // element indices of the isotropy subgroup
    bool maximal = false;
    std::vector<int> movable;   // indices with nontrivial orbit under the subgroup
    bool acts_trivially = false;
    bool rcp = false;           // every movable index admits a rotating circle
};

struct SymmetryReport {
    bool coercive = false;
    ActionClassification classification;
    std::vector<IsotropyRcp> isotropy;
    bool rcp_maximal = false;   // every maximal T-isotropy subgroup has the property
    bool rcp_kertau = false;    // ker tau has the property
    bool theorem_applicable = false; // each maximal subgroup: rcp or acts trivially
};
SymmetryReport rotating_circle_property(const GroupAction& action);

// Embedding of V^{H_i} into cluster configurations: body j of the orbit gets
// rho(h) p where h maps i to j. Requires p fixed by H_i (within 1e-8).
// Returns a full n*d configuration supported on the orbit of i.
Eigen::VectorXd iota_embedding(const Subgroup& H, const std::vector<int>& cluster,
                               int i, const Eigen::VectorXd& p);

} // namespace nbsym
