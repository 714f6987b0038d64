#include "nbsym/group.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace nbsym {

namespace {

GroupElement compose(const GroupElement& a, const GroupElement& b) {
    GroupElement r;
    r.tau = a.tau.compose(b.tau);
    r.rho = a.rho * b.rho;
    r.sigma = a.sigma.compose(b.sigma);
    return r;
}

GroupElement invert(const GroupElement& g) {
    GroupElement r;
    r.tau = g.tau.inverse();
    r.rho = g.rho.transpose();
    r.sigma = g.sigma.inverse();
    return r;
}

bool same_element(const GroupElement& a, const GroupElement& b, double tol) {
    if (a.tau != b.tau || a.sigma != b.sigma) return false;
    return (a.rho - b.rho).cwiseAbs().maxCoeff() <= tol;
}

// exact part of an element, used to shortlist candidates before the rho comparison
using ExactKey = std::pair<std::pair<int, std::pair<std::int64_t, std::int64_t>>, std::vector<int>>;

ExactKey key_of(const GroupElement& g) {
    return {{int(g.tau.kind), {g.tau.c.num, g.tau.c.den}}, g.sigma.img};
}

} // namespace

int GroupAction::find(const GroupElement& g, double tol) const {
    for (int i = 0; i < order(); ++i)
        if (same_element(elements[i], g, tol)) return i;
    return -1;
}

bool Subgroup::contains(int idx) const {
    return std::binary_search(members.begin(), members.end(), idx);
}

std::string to_string(ActionType t) {
    switch (t) {
        case ActionType::cyclic: return "cyclic";
        case ActionType::brake: return "brake";
        default: return "dihedral";
    }
}

std::string to_string(CollisionBoundVerdict v) {
    switch (v) {
        case CollisionBoundVerdict::bound: return "bound";
        case CollisionBoundVerdict::not_detected: return "not_detected";
        default: return "unknown";
    }
}

GroupAction close_group(const std::vector<GroupElement>& generators,
                        int n, int d, double alpha, double period,
                        const Eigen::VectorXd& masses, int cap) {
    if (n < 1 || d < 1) throw std::invalid_argument("close_group: need n >= 1, d >= 1");
    if (masses.size() != n) throw std::invalid_argument("close_group: masses size mismatch");
    if ((masses.array() <= 0).any()) throw std::invalid_argument("close_group: masses must be positive");
    if (period <= 0) throw std::invalid_argument("close_group: period must be positive");

    for (const auto& g : generators) {
        if (g.rho.rows() != d || g.rho.cols() != d)
            throw std::invalid_argument("close_group: rho must be d x d");
        double ortho = (g.rho.transpose() * g.rho - Eigen::MatrixXd::Identity(d, d))
                           .cwiseAbs().maxCoeff();
        if (ortho > 1e-9) throw std::invalid_argument("close_group: rho not orthogonal within 1e-9");
        if (g.sigma.n() != n) throw std::invalid_argument("close_group: sigma size mismatch");
        for (int i = 0; i < n; ++i) {
            int j = g.sigma(i);
            if (std::abs(masses[i] - masses[j]) > 1e-12 * std::max(1.0, std::abs(masses[i])))
                throw std::invalid_argument("close_group: sigma maps between unequal masses");
        }
    }

    GroupAction act;
    act.n = n; act.d = d; act.alpha = alpha; act.period = period; act.masses = masses;

    GroupElement identity;
    identity.tau = TimeTransform::identity();
    identity.rho = Eigen::MatrixXd::Identity(d, d);
    identity.sigma = Perm(n);
    act.elements.push_back(identity);

    std::map<ExactKey, std::vector<int>> index;
    index[key_of(identity)].push_back(0);

    auto locate = [&](const GroupElement& g) -> int {
        auto it = index.find(key_of(g));
        if (it == index.end()) return -1;
        for (int i : it->second)
            if ((act.elements[i].rho - g.rho).cwiseAbs().maxCoeff() <= 1e-9) return i;
        return -1;
    };

    std::vector<int> frontier = {0};
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int i : frontier) {
            for (const auto& gen : generators) {
                GroupElement prod = compose(act.elements[i], gen);
                if (locate(prod) >= 0) continue;
                if (int(act.elements.size()) >= cap)
                    throw std::runtime_error("close_group: cap exceeded, group not closed within " +
                                             std::to_string(cap) + " elements");
                act.elements.push_back(prod);
                int idx = int(act.elements.size()) - 1;
                index[key_of(prod)].push_back(idx);
                next.push_back(idx);
            }
        }
        frontier = std::move(next);
    }

    int N = act.order();
    act.mul.assign(N, std::vector<int>(N, -1));
    act.inv.assign(N, -1);
    for (int a = 0; a < N; ++a) {
        for (int b = 0; b < N; ++b) {
            int p = locate(compose(act.elements[a], act.elements[b]));
            if (p < 0) throw std::runtime_error("close_group: composition table inconsistent");
            act.mul[a][b] = p;
            if (p == 0) act.inv[a] = b;
        }
        if (act.inv[a] < 0) throw std::runtime_error("close_group: element without inverse");
        double ortho = (act.elements[a].rho.transpose() * act.elements[a].rho -
                        Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
        if (ortho > 1e-8)
            throw std::runtime_error("close_group: orthogonality drift past 1e-8 after closure");
    }
    return act;
}

Subgroup kernel(const GroupAction& action, Component which) {
    Subgroup H;
    H.parent = &action;
    int d = action.d;
    for (int i = 0; i < action.order(); ++i) {
        const auto& g = action.elements[i];
        bool in = false;
        switch (which) {
            case Component::tau: in = g.tau.is_identity(); break;
            case Component::rho:
                in = (g.rho - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-9;
                break;
            case Component::sigma: in = g.sigma.is_identity(); break;
        }
        if (in) H.members.push_back(i);
    }
    return H;
}

Subgroup whole_group(const GroupAction& action) {
    Subgroup H;
    H.parent = &action;
    H.members.resize(action.order());
    std::iota(H.members.begin(), H.members.end(), 0);
    return H;
}

Subgroup trivial_subgroup(const GroupAction& action) {
    Subgroup H;
    H.parent = &action;
    H.members = {0};
    return H;
}

Subgroup generated_subgroup(const GroupAction& action, const std::vector<int>& gens) {
    std::set<int> got = {0};
    std::vector<int> frontier = {0};
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int i : frontier)
            for (int g : gens) {
                int p = action.mul[i][g];
                if (got.insert(p).second) next.push_back(p);
            }
        frontier = std::move(next);
    }
    Subgroup H;
    H.parent = &action;
    H.members.assign(got.begin(), got.end());
    return H;
}

bool is_subgroup(const GroupAction& action, const std::vector<int>& members) {
    std::set<int> s(members.begin(), members.end());
    if (!s.count(0)) return false;
    for (int a : s)
        for (int b : s)
            if (!s.count(action.mul[a][b])) return false;
    return true;
}

Eigen::MatrixXd config_matrix(const GroupAction& action, int element) {
    const auto& g = action.elements[element];
    int n = action.n, d = action.d;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n * d, n * d);
    Perm sinv = g.sigma.inverse();
    for (int i = 0; i < n; ++i)
        M.block(i * d, sinv(i) * d, d, d) = g.rho;
    return M;
}

Eigen::MatrixXd fixed_config_space(const GroupAction& action, const Subgroup& H) {
    int n = action.n, d = action.d;
    int nd = n * d;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(nd, nd);
    for (int idx : H.members) P += config_matrix(action, idx);
    P /= double(H.members.size());

    // center-of-mass projector x_i -> x_i - (sum_j m_j x_j)/(sum m)
    double mtot = action.masses.sum();
    Eigen::MatrixXd C = Eigen::MatrixXd::Identity(nd, nd);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            C.block(i * d, j * d, d, d) -=
                (action.masses[j] / mtot) * Eigen::MatrixXd::Identity(d, d);

    Eigen::MatrixXd Q = C * P;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Q, Eigen::ComputeThinU);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-9) ++rank;
    return svd.matrixU().leftCols(rank);
}

namespace {

// distinct time transforms of the quotient G/ker tau
std::vector<TimeTransform> time_images(const GroupAction& action) {
    std::set<TimeTransform> s;
    for (const auto& g : action.elements) s.insert(g.tau);
    return {s.begin(), s.end()};
}

Subgroup reflection_preimage(const GroupAction& action, const TimeTransform& ref) {
    Subgroup H;
    H.parent = &action;
    for (int i = 0; i < action.order(); ++i) {
        const auto& t = action.elements[i].tau;
        if (t.is_identity() || t == ref) H.members.push_back(i);
    }
    return H;
}

} // namespace

ActionClassification classify_action_type(const GroupAction& action) {
    int reflections = 0;
    for (const auto& t : time_images(action))
        if (!t.is_rotation()) ++reflections;
    if (reflections == 0) return {ActionType::cyclic, 1};
    if (reflections == 1) return {ActionType::brake, 2};
    return {ActionType::dihedral, reflections + 1};
}

std::vector<TimeIsotropy> time_isotropy_subgroups(const GroupAction& action) {
    std::vector<TimeIsotropy> out;
    auto images = time_images(action);

    std::vector<TimeTransform> refs;
    std::set<Rational> fixed;
    for (const auto& t : images)
        if (!t.is_rotation()) {
            refs.push_back(t);
            for (const auto& f : t.fixed_fractions()) fixed.insert(f);
        }

    // ker tau, the minimal isotropy, holds at every non-fixed time
    TimeIsotropy min_entry;
    min_entry.subgroup = kernel(action, Component::tau);
    min_entry.minimal = true;
    min_entry.maximal = refs.empty();
    if (fixed.empty()) {
        min_entry.time = Rational(0);
    } else if (fixed.size() == 1) {
        min_entry.time = (*fixed.begin() + Rational(1, 4)).mod1();
    } else {
        auto it = fixed.begin();
        Rational a = *it; ++it;
        min_entry.time = ((a + *it) * Rational(1, 2)).mod1();
    }
    out.push_back(min_entry);

    for (const auto& r : refs) {
        TimeIsotropy e;
        e.time = r.fixed_fractions()[0];
        e.subgroup = reflection_preimage(action, r);
        e.maximal = true;
        out.push_back(e);
    }
    return out;
}

FundamentalDomain fundamental_domain(const GroupAction& action) {
    FundamentalDomain fd;
    auto images = time_images(action);
    int gbar = int(images.size());

    std::set<Rational> fixed;
    for (const auto& t : images)
        if (!t.is_rotation())
            for (const auto& f : t.fixed_fractions()) fixed.insert(f);

    if (fixed.empty()) {
        fd.start = Rational(0);
        fd.end = Rational(1, gbar);
        fd.H0 = fd.H1 = kernel(action, Component::tau);
        return fd;
    }

    std::vector<Rational> fs(fixed.begin(), fixed.end());
    fd.start = fs[0];
    fd.end = fs.size() > 1 ? fs[1] : (fs[0] + Rational(1, 2)).mod1();

    auto stabilizer_at = [&](const Rational& f) {
        Subgroup H;
        H.parent = &action;
        for (int i = 0; i < action.order(); ++i) {
            const auto& t = action.elements[i].tau;
            bool fixes = t.is_identity();
            if (!t.is_rotation()) {
                auto fr = t.fixed_fractions();
                fixes = (fr[0] == f.mod1()) || (fr[1] == f.mod1());
            }
            if (fixes) H.members.push_back(i);
        }
        return H;
    };
    fd.H0 = stabilizer_at(fd.start);
    fd.H1 = stabilizer_at(fd.end);
    return fd;
}

ReducibilityReport reducibility_check(const GroupAction& action) {
    ReducibilityReport rep;
    auto kt = kernel(action, Component::tau);
    auto kr = kernel(action, Component::rho);
    auto ks = kernel(action, Component::sigma);

    auto inter = [](const Subgroup& A, const Subgroup& B) {
        std::vector<int> out;
        std::set_intersection(A.members.begin(), A.members.end(),
                              B.members.begin(), B.members.end(),
                              std::back_inserter(out));
        return out;
    };

    auto trs = inter(kt, kr);
    {
        std::vector<int> all;
        std::set_intersection(trs.begin(), trs.end(), ks.members.begin(), ks.members.end(),
                              std::back_inserter(all));
        rep.kernel_intersection_trivial = (all.size() <= 1);
    }

    rep.subspace_trigger = inter(kt, ks).size() > 1;

    auto rs = inter(kr, ks);
    if (rs.size() > 2) {
        rep.period_trigger = true;
    } else if (rs.size() == 2) {
        int g = rs[0] == 0 ? rs[1] : rs[0];
        // an order-2 time rotation forces a doubly-covered loop; a time
        // reflection only forces a brake orbit and is not flagged
        rep.period_trigger = action.elements[g].tau.is_rotation();
    }
    return rep;
}

namespace {

// does the H-fixed space lie inside some pairwise-collision subspace?
bool fixed_space_in_collision_set(const GroupAction& action, const Eigen::MatrixXd& basis) {
    int n = action.n, d = action.d;
    if (basis.cols() == 0) return true;  // the zero space sits in every Delta_{ij}
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double worst = 0;
            for (int b = 0; b < basis.cols(); ++b) {
                Eigen::VectorXd diff =
                    basis.col(b).segment(i * d, d) - basis.col(b).segment(j * d, d);
                worst = std::max(worst, diff.cwiseAbs().maxCoeff());
            }
            if (worst <= 1e-9) return true;
        }
    return false;
}

// rank of (x_i - x_j) restricted to the column space of basis
int collision_codim(const Eigen::MatrixXd& basis, int i, int j, int d) {
    if (basis.cols() == 0) return 0;
    Eigen::MatrixXd D(d, basis.cols());
    for (int b = 0; b < basis.cols(); ++b)
        D.col(b) = basis.col(b).segment(i * d, d) - basis.col(b).segment(j * d, d);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
    int r = 0;
    for (int k = 0; k < svd.singularValues().size(); ++k)
        if (svd.singularValues()[k] > 1e-9) ++r;
    return r;
}

} // namespace

CollisionBoundVerdict bound_to_collisions_check(const GroupAction& action) {
    auto kt = kernel(action, Component::tau);
    auto kr = kernel(action, Component::rho);

    std::vector<int> ktr;
    std::set_intersection(kt.members.begin(), kt.members.end(),
                          kr.members.begin(), kr.members.end(), std::back_inserter(ktr));
    if (ktr.size() > 1) return CollisionBoundVerdict::bound;

    auto cls = classify_action_type(action);
    bool unknown = false;

    if (cls.type != ActionType::cyclic) {
        for (const auto& iso : time_isotropy_subgroups(action)) {
            if (!iso.maximal || iso.subgroup.order() == action.order()) continue;
            std::vector<int> hr;
            std::set_intersection(iso.subgroup.members.begin(), iso.subgroup.members.end(),
                                  kr.members.begin(), kr.members.end(), std::back_inserter(hr));
            if (hr.size() <= 1) continue;
            auto basis = fixed_config_space(action, iso.subgroup);
            if (fixed_space_in_collision_set(action, basis))
                return CollisionBoundVerdict::bound;
            unknown = true;  // first test inconclusive, connectivity criterion would be needed
        }
    }

    // a codimension-1 collision subspace inside X^{ker tau} can disconnect it,
    // which is the other case the connectivity criterion covers
    auto kt_basis = fixed_config_space(action, kt);
    for (int i = 0; i < action.n && !unknown; ++i)
        for (int j = i + 1; j < action.n && !unknown; ++j)
            if (collision_codim(kt_basis, i, j, action.d) == 1) unknown = true;

    return unknown ? CollisionBoundVerdict::unknown : CollisionBoundVerdict::not_detected;
}

} // namespace nbsym
