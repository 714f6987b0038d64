#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "nbsym/perm.hpp"
#include "nbsym/timetf.hpp"

namespace nbsym {

struct GroupElement {
    TimeTransform tau;
    Eigen::MatrixXd rho;
    Perm sigma;
};

// Finite group acting on the time circle (tau), on space (rho) and on the
// index set (sigma), together with the problem data it constrains.
struct GroupAction {
    int n = 0;
    int d = 2;
    double alpha = 1.0;
    double period = 1.0;
    Eigen::VectorXd masses;
    std::vector<GroupElement> elements;     // [0] is the identity
    std::vector<std::vector<int>> mul;      // mul[a][b] = index of elements[a]*elements[b]
    std::vector<int> inv;

    int order() const { return int(elements.size()); }
    const GroupElement& id() const { return elements[0]; }
    int find(const GroupElement& g, double tol = 1e-9) const;
};

struct Subgroup {
    const GroupAction* parent = nullptr;
    std::vector<int> members;               // sorted element indices

    int order() const { return int(members.size()); }
    bool contains(int idx) const;
    friend bool operator==(const Subgroup& a, const Subgroup& b) {
        return a.parent == b.parent && a.members == b.members;
    }
};

enum class ActionType { cyclic, brake, dihedral };

std::string to_string(ActionType t);

struct TimeIsotropy {
    Rational time;          // representative time as fraction of T
    Subgroup subgroup;
    bool maximal = false;
    bool minimal = false;
};

struct FundamentalDomain {
    Rational start;         // fractions of T
    Rational end;
    Subgroup H0, H1;
};

struct ReducibilityReport {
    bool kernel_intersection_trivial = true;  // (ker tau ^ ker rho ^ ker sigma) = 1
    // nontrivial ker tau ^ ker sigma: every equivariant loop lives in a proper
    // linear subspace of V
    bool subspace_trigger = false;
    // ker rho ^ ker sigma contains a nontrivial time rotation (or has order > 2):
    // the problem restricts to a shorter period
    bool period_trigger = false;
};

enum class CollisionBoundVerdict { bound, not_detected, unknown };

std::string to_string(CollisionBoundVerdict v);

GroupAction close_group(const std::vector<GroupElement>& generators,
                        int n, int d, double alpha, double period,
                        const Eigen::VectorXd& masses,
                        int cap = 10000);

enum class Component { tau, rho, sigma };

Subgroup kernel(const GroupAction& action, Component which);
Subgroup whole_group(const GroupAction& action);
Subgroup trivial_subgroup(const GroupAction& action);
Subgroup generated_subgroup(const GroupAction& action, const std::vector<int>& gens);
bool is_subgroup(const GroupAction& action, const std::vector<int>& members);

// Orthonormal basis (columns) of the H-fixed configurations inside the
// mass-centered subspace of V^n; empty (nd x 0) when the fixed space is 0.
Eigen::MatrixXd fixed_config_space(const GroupAction& action, const Subgroup& H);

// Matrix of the configuration-space action of one element on R^{nd}.
Eigen::MatrixXd config_matrix(const GroupAction& action, int element);

struct ActionClassification {
    ActionType type;
    int l;                  // number of distinct T-isotropy subgroups
};

ActionClassification classify_action_type(const GroupAction& action);
std::vector<TimeIsotropy> time_isotropy_subgroups(const GroupAction& action);
FundamentalDomain fundamental_domain(const GroupAction& action);
ReducibilityReport reducibility_check(const GroupAction& action);
CollisionBoundVerdict bound_to_collisions_check(const GroupAction& action);

} // namespace nbsym
