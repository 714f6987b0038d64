#include "nbsym/catalog.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nbsym/loops.hpp"

namespace nbsym {

namespace {

using Eigen::MatrixXd;

MatrixXd rot2(double theta) {
    MatrixXd R(2, 2);
    R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return R;
}

MatrixXd rotz3(double theta, double zsign) {
    MatrixXd R = MatrixXd::Identity(3, 3);
    R.topLeftCorner(2, 2) = rot2(theta);
    R(2, 2) = zsign;
    return R;
}

MatrixXd diag2(double a, double b) {
    MatrixXd D = MatrixXd::Zero(2, 2);
    D(0, 0) = a;
    D(1, 1) = b;
    return D;
}

GroupElement elem(TimeTransform tau, MatrixXd rho, Perm sigma) {
    GroupElement g;
    g.tau = tau;
    g.rho = std::move(rho);
    g.sigma = std::move(sigma);
    return g;
}

Perm cycle_n(int n) { // (1 2 ... n), 0-based images
    std::vector<int> img(n);
    for (int i = 0; i < n; ++i) img[i] = (i + 1) % n;
    return Perm(img);
}

int param_int(const std::map<std::string, double>& params,
              const std::map<std::string, double>& defaults, const std::string& key) {
    auto it = params.find(key);
    double v = it != params.end() ? it->second
                                  : defaults.at(key);
    double r = std::round(v);
    if (std::abs(v - r) > 1e-9)
        throw std::invalid_argument("parameter " + key + " must be an integer");
    return static_cast<int>(r);
}

double param_real(const std::map<std::string, double>& params,
                  const std::map<std::string, double>& defaults, const std::string& key) {
    auto it = params.find(key);
    return it != params.end() ? it->second : defaults.at(key);
}

GroupAction close_with(int n, int d, double alpha, double period,
                       const std::vector<GroupElement>& gens) {
    return close_group(gens, n, d, alpha, period, Eigen::VectorXd::Ones(n));
}

} // namespace

std::vector<CatalogEntry> catalog_entries() {
    std::vector<CatalogEntry> out;
    auto add = [&out](std::string name, std::string desc,
                      std::map<std::string, double> params, ExpectedFacts f) {
        out.push_back({std::move(name), std::move(desc), std::move(params), f});
    };

    ExpectedFacts cyc; // defaults: coercive, cyclic, all RCP flags true
    add("choreography", "single choreography loop on n bodies, Z_n cyclic shift",
        {{"n", 3}, {"alpha", 1}}, cyc);

    ExpectedFacts dih = cyc;
    dih.action_type = ActionType::dihedral;
    add("eight_dihedral",
        "figure-eight type action of D_{2n} on n odd bodies (half-turn plus shift)",
        {{"n", 3}, {"alpha", 1}}, dih);

    add("eight_cyclic",
        "figure-eight type action of the cyclic group of order 2n, n odd",
        {{"n", 3}, {"alpha", 1}}, cyc);

    ExpectedFacts d4q = dih;
    d4q.rcp_maximal = false;
    d4q.theorem_applicable = false;
    d4q.boundary_collisions_unresolved = true;
    add("d4q_c2",
        "4-body action of D_{4q} x C_2, q odd: brake-like reflections with a "
        "q-fold rotating frame",
        {{"q", 3}, {"alpha", 1}}, d4q);
    add("dq_c2", "even-q variant of d4q_c2 on 4 bodies",
        {{"q", 4}, {"alpha", 1}}, d4q);

    add("hiphop", "generalized hip-hop on n even bodies in R^3 (antipodal flip)",
        {{"n", 4}, {"alpha", 1}}, cyc);

    add("antipodal", "two bodies, antipodal half-period flip in R^3",
        {{"n", 2}, {"alpha", 1}}, cyc);

    add("two_triangles", "six bodies, two rotating triangles, D_6 x C_3 planar",
        {{"alpha", 1}}, dih);
    add("two_triangles_spatial", "spatial variant of two_triangles with a "
        "vertical flip, order 36",
        {{"alpha", 1}}, dih);

    add("nonplanar_choreo",
        "three bodies in R^3, cyclic group of order 6k mixing a vertical flip "
        "with a 1/(6k) time shift",
        {{"k", 2}, {"alpha", 1}}, cyc);
    add("nonplanar_choreo_p",
        "integer-parameter generalization of nonplanar_choreo (horizontal "
        "rotation angle p pi / (3k))",
        {{"k", 2}, {"p", 1}, {"alpha", 1}}, cyc);

    return out;
}

const CatalogEntry& catalog_entry(const std::string& name) {
    static const std::vector<CatalogEntry> entries = catalog_entries();
    for (const auto& e : entries)
        if (e.name == name) return e;
    throw std::invalid_argument("unknown catalog entry: " + name);
}

GroupAction catalog_build(const std::string& name,
                          const std::map<std::string, double>& params) {
    const CatalogEntry& entry = catalog_entry(name);
    const auto& dp = entry.default_params;
    double alpha = param_real(params, dp, "alpha");
    const double pi = std::numbers::pi;

    if (name == "choreography") {
        int n = param_int(params, dp, "n");
        if (n < 2) throw std::invalid_argument("choreography needs n >= 2");
        GroupElement g = elem(TimeTransform::rotation(Rational(-1, n)),
                              MatrixXd::Identity(2, 2), cycle_n(n));
        return close_with(n, 2, alpha, 1.0, {g});
    }

    if (name == "eight_dihedral") {
        int n = param_int(params, dp, "n");
        if (n < 3 || n % 2 == 0)
            throw std::invalid_argument("eight_dihedral needs odd n >= 3");
        // (1,n-1)(2,n-2)...  in 1-based cycles; the last body stays fixed
        std::vector<int> img(n);
        for (int i = 0; i < n - 1; ++i) img[i] = n - 2 - i;
        img[n - 1] = n - 1;
        GroupElement g1 = elem(TimeTransform::reflection(Rational(1, 8)),
                               -MatrixXd::Identity(2, 2), Perm(img));
        GroupElement g2 = elem(TimeTransform::rotation(Rational(-1, n)),
                               MatrixXd::Identity(2, 2), cycle_n(n));
        return close_with(n, 2, alpha, 1.0, {g1, g2});
    }

    if (name == "eight_cyclic") {
        int n = param_int(params, dp, "n");
        if (n < 3 || n % 2 == 0)
            throw std::invalid_argument("eight_cyclic needs odd n >= 3");
        GroupElement g1 = elem(TimeTransform::rotation(Rational(1, 2)),
                               diag2(-1, 1), Perm(n));
        GroupElement g2 = elem(TimeTransform::rotation(Rational(1, 2 * n) - Rational(1, 2)),
                               MatrixXd::Identity(2, 2), cycle_n(n));
        return close_with(n, 2, alpha, 1.0, {g1, g2});
    }

    if (name == "d4q_c2" || name == "dq_c2") {
        int q = param_int(params, dp, "q");
        if (name == "d4q_c2" && (q < 3 || q % 2 == 0))
            throw std::invalid_argument("d4q_c2 needs odd q >= 3");
        if (name == "dq_c2" && (q < 4 || q % 2 == 1))
            throw std::invalid_argument("dq_c2 needs even q >= 4");
        Perm s12_34(std::vector<int>{1, 0, 3, 2});
        Perm s13_24(std::vector<int>{2, 3, 0, 1});
        GroupElement g1 = elem(TimeTransform::reflection(Rational(0)),
                               diag2(1, -1), s12_34);
        GroupElement g2 = name == "d4q_c2"
            ? elem(TimeTransform::rotation(Rational(1, 2 * q)), rot2(pi / q), s13_24)
            : elem(TimeTransform::rotation(Rational(1, q)), rot2(2 * pi / q), s13_24);
        GroupElement c = elem(TimeTransform::identity(),
                              -MatrixXd::Identity(2, 2), s12_34);
        return close_with(4, 2, alpha, 1.0, {g1, g2, c});
    }

    if (name == "hiphop") {
        int n = param_int(params, dp, "n");
        if (n < 4 || n % 2 == 1)
            throw std::invalid_argument("hiphop needs even n >= 4");
        GroupElement g1 = elem(TimeTransform::identity(),
                               rotz3(2 * pi / n, -1.0), cycle_n(n));
        GroupElement g2 = elem(TimeTransform::rotation(Rational(1, 2)),
                               -MatrixXd::Identity(3, 3), Perm(n));
        return close_with(n, 3, alpha, 1.0, {g1, g2});
    }

    if (name == "antipodal") {
        int n = param_int(params, dp, "n");
        if (n != 2) throw std::invalid_argument("antipodal is a 2-body action");
        GroupElement g = elem(TimeTransform::rotation(Rational(1, 2)),
                              -MatrixXd::Identity(3, 3), Perm(2));
        return close_with(2, 3, alpha, 1.0, {g});
    }

    if (name == "two_triangles") {
        Perm p132_456(std::vector<int>{2, 0, 1, 4, 5, 3});
        Perm p123_456(std::vector<int>{1, 2, 0, 4, 5, 3});
        Perm swap(std::vector<int>{3, 4, 5, 0, 1, 2});
        GroupElement g1 = elem(TimeTransform::rotation(Rational(1, 3)),
                               MatrixXd::Identity(2, 2), p132_456);
        GroupElement g2 = elem(TimeTransform::reflection(Rational(1, 8)),
                               -MatrixXd::Identity(2, 2), swap);
        GroupElement c = elem(TimeTransform::identity(), rot2(2 * pi / 3), p123_456);
        return close_with(6, 2, alpha, 1.0, {g1, g2, c});
    }

    if (name == "two_triangles_spatial") {
        Perm p132_456(std::vector<int>{2, 0, 1, 4, 5, 3});
        Perm p123_456(std::vector<int>{1, 2, 0, 4, 5, 3});
        Perm swap(std::vector<int>{3, 4, 5, 0, 1, 2});
        MatrixXd flipxy = MatrixXd::Identity(3, 3);
        flipxy(0, 0) = -1;
        flipxy(1, 1) = -1;
        MatrixXd flipz = MatrixXd::Identity(3, 3);
        flipz(2, 2) = -1;
        GroupElement g1 = elem(TimeTransform::rotation(Rational(1, 3)),
                               MatrixXd::Identity(3, 3), p132_456);
        GroupElement g2 = elem(TimeTransform::reflection(Rational(1, 8)),
                               flipxy, swap);
        GroupElement c = elem(TimeTransform::identity(), rotz3(2 * pi / 3, 1.0),
                              p123_456);
        GroupElement c2 = elem(TimeTransform::rotation(Rational(1, 2)), flipz, Perm(6));
        return close_with(6, 3, alpha, 1.0, {g1, g2, c, c2});
    }

    if (name == "nonplanar_choreo" || name == "nonplanar_choreo_p") {
        int k = param_int(params, dp, "k");
        if (k < 2) throw std::invalid_argument("needs k >= 2");
        int p = 3;
        if (name == "nonplanar_choreo_p") {
            p = param_int(params, dp, "p");
            if (p == 0) throw std::invalid_argument("needs p != 0");
        }
        GroupElement c = elem(TimeTransform::rotation(Rational(1, 6 * k)),
                              rotz3(p * pi / (3.0 * k), -1.0), cycle_n(3));
        return close_with(3, 3, alpha, 2 * pi, {c});
    }

    throw std::invalid_argument("unknown catalog entry: " + name);
}

double lagrange_reference_radius_p(int p, int k, double alpha) {
    double omega = static_cast<double>(p) - 2.0 * k;
    return std::pow(alpha * std::pow(3.0, -alpha / 2.0) / (2.0 * omega * omega),
                    1.0 / (2.0 + alpha));
}

double lagrange_reference_radius(int k, double alpha) {
    return lagrange_reference_radius_p(3, k, alpha);
}

Loop lagrange_reference_p(int p, int k, double alpha, int M) {
    if (k < 2 || p == 0) throw std::invalid_argument("needs k >= 2 and p != 0");
    const double pi = std::numbers::pi;
    double r = lagrange_reference_radius_p(p, k, alpha);
    double omega = static_cast<double>(p) - 2.0 * k;
    Loop loop = make_loop(3, 3, M, 2 * pi, Eigen::VectorXd::Ones(3));
    for (int j = 0; j < M; ++j) {
        double t = loop.T * j / M;
        for (int i = 0; i < 3; ++i) {
            double phase = omega * t + 2.0 * pi * i / 3.0;
            loop.at(j, i, 0) = r * std::cos(phase);
            loop.at(j, i, 1) = r * std::sin(phase);
            loop.at(j, i, 2) = 0.0;
        }
    }
    return loop;
}

Loop lagrange_reference(int k, double alpha, int M) {
    return lagrange_reference_p(3, k, alpha, M);
}

Loop vertical_variation(int k, int M) {
    const double pi = std::numbers::pi;
    Loop v = make_loop(3, 3, M, 2 * pi, Eigen::VectorXd::Ones(3));
    const double phases[3] = {0.0, 2.0 * pi / 3.0, -2.0 * pi / 3.0};
    for (int j = 0; j < M; ++j) {
        double t = v.T * j / M;
        for (int i = 0; i < 3; ++i) v.at(j, i, 2) = std::sin(k * t + phases[i]);
    }
    return v;
}

} // namespace nbsym
