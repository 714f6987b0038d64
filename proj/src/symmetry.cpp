#include "nbsym/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace nbsym {

namespace {

constexpr double kTol = 1e-8;

// rho restricted to the H-orbit structure: the matrices of H acting on V
std::vector<Eigen::MatrixXd> rho_images(const Subgroup& H) {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(H.members.size());
    for (int e : H.members) out.push_back(H.parent->elements[e].rho);
    return out;
}

// orthonormal basis of the common fixed space of a list of orthogonal matrices
Eigen::MatrixXd common_fixed_space(const std::vector<Eigen::MatrixXd>& mats, int d) {
    if (mats.empty()) return Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd stack(static_cast<long>(mats.size()) * d, d);
    for (size_t k = 0; k < mats.size(); ++k)
        stack.middleRows(static_cast<long>(k) * d, d) =
            mats[k] - Eigen::MatrixXd::Identity(d, d);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stack, Eigen::ComputeFullV);
    int rank = 0;
    for (long i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-9) ++rank;
    return svd.matrixV().rightCols(d - rank);
}

// decompose angle of a 2x2 rotation block
double rotation_angle(const Eigen::Matrix2d& R) {
    return std::atan2(R(1, 0), R(0, 0));
}

// Invariant-subspace split of the rho(H)-representation on the column space
// of basis W, via the eigenspaces of a random symmetrized commutant element.
struct RepPiece {
    Eigen::MatrixXd basis; // d x k, orthonormal
};

std::vector<RepPiece> split_representation(const std::vector<Eigen::MatrixXd>& mats,
                                           const Eigen::MatrixXd& W,
                                           std::uint64_t seed) {
    std::vector<RepPiece> out;
    long k = W.cols();
    if (k == 0) return out;
    if (k == 1) {
        out.push_back({W});
        return out;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int attempt = 0; attempt < 3; ++attempt) {
        Eigen::MatrixXd A(k, k);
        for (long r = 0; r < k; ++r)
            for (long c = 0; c < k; ++c) A(r, c) = N(rng);
        A = ((A + A.transpose()) / 2.0).eval();
        // average A over the restricted representation
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(k, k);
        for (const auto& R : mats) {
            Eigen::MatrixXd Rk = W.transpose() * R * W; // k x k orthogonal
            C += Rk * A * Rk.transpose();
        }
        C /= static_cast<double>(mats.size());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
        const Eigen::VectorXd& ev = es.eigenvalues();
        double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
        // group eigenvalues into clusters (relative gap 1e-7)
        std::vector<std::pair<long, long>> clusters;
        long start = 0;
        for (long i = 1; i <= k; ++i) {
            if (i == k || std::abs(ev[i] - ev[i - 1]) > 1e-7 * scale) {
                clusters.emplace_back(start, i);
                start = i;
            }
        }
        if (clusters.size() == 1 && k > 1) continue; // degenerate draw, retry
        for (auto [a, b] : clusters) {
            Eigen::MatrixXd sub = W * es.eigenvectors().middleCols(a, b - a);
            if (b - a == static_cast<long>(k)) {
                out.push_back({sub});
            } else {
                auto finer = split_representation(mats, sub, seed + 1 + attempt);
                out.insert(out.end(), finer.begin(), finer.end());
            }
        }
        return out;
    }
    out.push_back({W}); // irreducible for every draw tried
    return out;
}

} // namespace

bool coercivity_test(const GroupAction& action) {
    Eigen::MatrixXd basis = fixed_config_space(action, whole_group(action));
    return basis.cols() == 0;
}

Subgroup index_isotropy(const Subgroup& H, int i) {
    if (!H.parent) throw std::invalid_argument("index_isotropy: empty subgroup");
    const GroupAction& A = *H.parent;
    if (i < 0 || i >= A.n) throw std::invalid_argument("index out of range");
    Subgroup out;
    out.parent = H.parent;
    for (int e : H.members)
        if (A.elements[e].sigma(i) == i) out.members.push_back(e);
    return out;
}

std::vector<std::vector<int>> homogeneous_orbits(const Subgroup& H) {
    if (!H.parent) throw std::invalid_argument("homogeneous_orbits: empty subgroup");
    const GroupAction& A = *H.parent;
    std::vector<bool> seen(A.n, false);
    std::vector<std::vector<int>> orbits;
    for (int i = 0; i < A.n; ++i) {
        if (seen[i]) continue;
        std::set<int> orbit;
        for (int e : H.members) orbit.insert(A.elements[e].sigma(i));
        std::vector<int> v(orbit.begin(), orbit.end());
        for (int x : v) seen[x] = true;
        orbits.push_back(std::move(v));
    }
    return orbits;
}

std::optional<RotatingCircleWitness> find_rotating_circle(const GroupAction& action,
                                                          const Subgroup& H, int i,
                                                          std::uint64_t seed) {
    if (!H.parent) throw std::invalid_argument("find_rotating_circle: empty subgroup");
    if (i < 0 || i >= action.n) throw std::invalid_argument("index out of range");
    const int d = action.d;
    Subgroup Hi = index_isotropy(H, i);

    auto make_witness = [&](const Eigen::VectorXd& e1,
                            const Eigen::VectorXd& e2) -> RotatingCircleWitness {
        RotatingCircleWitness w;
        w.index = i;
        w.subgroup = H;
        w.e1 = e1;
        w.e2 = e2;
        w.rotation_angles.reserve(H.members.size());
        for (int e : H.members) {
            const Eigen::MatrixXd& R = action.elements[e].rho;
            Eigen::Matrix2d blk;
            blk << e1.dot(R * e1), e1.dot(R * e2), e2.dot(R * e1), e2.dot(R * e2);
            w.rotation_angles.push_back(rotation_angle(blk));
        }
        return w;
    };

    auto plane_ok = [&](const Eigen::VectorXd& e1, const Eigen::VectorXd& e2) {
        for (int e : H.members) {
            const Eigen::MatrixXd& R = action.elements[e].rho;
            Eigen::VectorXd r1 = R * e1, r2 = R * e2;
            // leakage out of the plane
            Eigen::VectorXd p1 = r1 - e1 * e1.dot(r1) - e2 * e2.dot(r1);
            Eigen::VectorXd p2 = r2 - e1 * e1.dot(r2) - e2 * e2.dot(r2);
            if (p1.norm() > kTol || p2.norm() > kTol) return false;
            Eigen::Matrix2d blk;
            blk << e1.dot(r1), e1.dot(r2), e2.dot(r1), e2.dot(r2);
            if (blk.determinant() < 0.5) return false; // must be a rotation
        }
        return true;
    };

    // the circle must sit inside the fixed space of the isotropy of i
    std::vector<Eigen::MatrixXd> hi_mats = rho_images(Hi);
    Eigen::MatrixXd Vfix = common_fixed_space(hi_mats, d);
    if (Vfix.cols() < 2) return std::nullopt;

    // fast path for the planar case
    if (d == 2) {
        bool all_rot = true;
        for (int e : H.members)
            if (action.elements[e].rho.determinant() < 0.5) all_rot = false;
        if (all_rot && Vfix.cols() == 2) {
            Eigen::VectorXd e1 = Eigen::Vector2d(1, 0), e2 = Eigen::Vector2d(0, 1);
            if (plane_ok(e1, e2)) return make_witness(e1, e2);
        }
        return std::nullopt;
    }

    // restrict to W = fixed space of the normal closure N of H_i in H, which is
    // H-invariant (the fixed space of H_i itself need not be)
    std::set<int> closure(Hi.members.begin(), Hi.members.end());
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<int> cur(closure.begin(), closure.end());
        for (int h : H.members)
            for (int x : cur) {
                int conj = action.mul[action.mul[h][x]][action.inv[h]];
                if (closure.insert(conj).second) grew = true;
            }
    }
    std::vector<Eigen::MatrixXd> n_mats;
    for (int e : closure) n_mats.push_back(action.elements[e].rho);
    Eigen::MatrixXd W = common_fixed_space(n_mats, d);
    if (W.cols() < 2) return std::nullopt;

    std::vector<Eigen::MatrixXd> h_mats = rho_images(H);

    // (i) a 2-plane of H-fixed vectors always works (angles all zero)
    Eigen::MatrixXd hfix = common_fixed_space(h_mats, d);
    // intersect with W: both are fixed spaces; the H-fixed space is contained in
    // W whenever N fixes it, which holds since N < H
    if (hfix.cols() >= 2) return make_witness(hfix.col(0), hfix.col(1));

    // (ii) split W into irreducible pieces and look for rotation planes
    auto pieces = split_representation(h_mats, W, seed);
    std::vector<Eigen::VectorXd> lines; // 1D pieces, candidates for pairing
    std::vector<std::vector<double>> line_chars;
    for (const auto& piece : pieces) {
        if (piece.basis.cols() == 2) {
            Eigen::VectorXd e1 = piece.basis.col(0), e2 = piece.basis.col(1);
            if (plane_ok(e1, e2)) return make_witness(e1, e2);
        } else if (piece.basis.cols() == 1) {
            Eigen::VectorXd v = piece.basis.col(0);
            std::vector<double> chi;
            bool pm_one = true;
            for (const auto& R : h_mats) {
                double c = v.dot(R * v);
                if (std::abs(std::abs(c) - 1.0) > kTol) pm_one = false;
                chi.push_back(c > 0 ? 1.0 : -1.0);
            }
            if (pm_one) {
                lines.push_back(v);
                line_chars.push_back(chi);
            }
        }
    }
    // two 1D pieces with the same +-1 character span a plane on which H acts
    // by 0/pi rotations
    for (size_t a = 0; a < lines.size(); ++a)
        for (size_t b = a + 1; b < lines.size(); ++b) {
            if (line_chars[a] != line_chars[b]) continue;
            if (std::abs(lines[a].dot(lines[b])) > 1e-6) continue;
            if (plane_ok(lines[a], lines[b]))
                return make_witness(lines[a], lines[b]);
        }
    return std::nullopt;
}

SymmetryReport rotating_circle_property(const GroupAction& action) {
    SymmetryReport rep;
    rep.coercive = coercivity_test(action);
    rep.classification = classify_action_type(action);

    auto movable_and_rcp = [&](const Subgroup& H) {
        std::pair<std::vector<int>, bool> out;
        out.second = true;
        for (int i = 0; i < action.n; ++i) {
            bool moves = false;
            for (int e : H.members)
                if (action.elements[e].sigma(i) != i) { moves = true; break; }
            if (!moves) continue;
            out.first.push_back(i);
            if (!find_rotating_circle(action, H, i)) out.second = false;
        }
        return out;
    };

    auto acts_trivially = [&](const Subgroup& H) {
        for (int e : H.members)
            if (!action.elements[e].sigma.is_identity()) return false;
        return true;
    };

    bool all_max_rcp = true;
    bool applicable = true;
    for (const TimeIsotropy& iso : time_isotropy_subgroups(action)) {
        IsotropyRcp entry;
        entry.time = iso.time;
        entry.subgroup = iso.subgroup.members;
        entry.maximal = iso.maximal;
        auto [movable, rcp] = movable_and_rcp(iso.subgroup);
        entry.movable = std::move(movable);
        entry.rcp = rcp;
        entry.acts_trivially = acts_trivially(iso.subgroup);
        if (iso.maximal) {
            all_max_rcp = all_max_rcp && rcp;
            applicable = applicable && (rcp || entry.acts_trivially);
        }
        if (iso.minimal) rep.rcp_kertau = rcp;
        rep.isotropy.push_back(std::move(entry));
    }
    rep.rcp_maximal = all_max_rcp;
    rep.theorem_applicable = applicable;
    return rep;
}

Eigen::VectorXd iota_embedding(const Subgroup& H, const std::vector<int>& cluster,
                               int i, const Eigen::VectorXd& p) {
    if (!H.parent) throw std::invalid_argument("iota_embedding: empty subgroup");
    const GroupAction& A = *H.parent;
    const int d = A.d;
    if (p.size() != d) throw std::invalid_argument("iota_embedding: wrong dimension");
    if (i < 0 || i >= A.n) throw std::invalid_argument("index out of range");

    std::set<int> cl(cluster.begin(), cluster.end());
    if (!cl.count(i)) throw std::invalid_argument("index not in the cluster");
    // cluster must be the H-orbit of i
    std::set<int> orbit;
    for (int e : H.members) orbit.insert(A.elements[e].sigma(i));
    if (orbit != cl)
        throw std::invalid_argument("cluster is not the subgroup orbit of the index");

    Subgroup Hi = index_isotropy(H, i);
    for (int e : Hi.members)
        if ((A.elements[e].rho * p - p).norm() > kTol)
            throw std::invalid_argument("vector is not fixed by the index isotropy");

    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<long>(A.n) * d);
    for (int e : H.members) {
        int j = A.elements[e].sigma(i);
        out.segment(static_cast<long>(j) * d, d) = A.elements[e].rho * p;
    }
    return out;
}

} // namespace nbsym
