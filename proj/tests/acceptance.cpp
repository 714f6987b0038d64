// Acceptance suite: every release-blocking numerical claim in one binary.
// Prints one "criterion NN PASS/FAIL label" line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nbsym/averaging.hpp"
#include "nbsym/catalog.hpp"
#include "nbsym/group.hpp"
#include "nbsym/loops.hpp"
#include "nbsym/minimize.hpp"
#include "nbsym/symmetry.hpp"

using namespace nbsym;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

constexpr double pi = std::numbers::pi;

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

Loop random_loop(int n, int d, int M, double T, std::mt19937_64& rng,
                 int modes = 3) {
    Loop lp = make_loop(n, d, M, T, VectorXd::Ones(n));
    std::normal_distribution<double> N(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < d; ++c) {
            double a0 = N(rng);
            for (int j = 0; j < M; ++j) lp.at(j, i, c) = a0;
            for (int k = 1; k <= modes; ++k) {
                double ak = 0.3 * N(rng) / k, bk = 0.3 * N(rng) / k;
                for (int j = 0; j < M; ++j) {
                    double t = T * j / M;
                    lp.at(j, i, c) += ak * std::cos(2 * pi * k * t / T) +
                                      bk * std::sin(2 * pi * k * t / T);
                }
            }
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < M; ++j) lp.at(j, i, 0) += 3.0 * i;
    return lp;
}

std::pair<Vector3d, Vector3d> safe_pair(std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    for (;;) {
        Vector3d xi(N(rng), N(rng), N(rng)), delta(N(rng), N(rng), N(rng));
        if (xi.norm() < 0.3 || delta.norm() < 0.3) continue;
        delta *= 0.5;
        double ustar = std::max(0.0, -xi.dot(delta) / xi.squaredNorm());
        if (std::min(delta.norm(), (ustar * xi + delta).norm()) >
            0.2 * delta.norm())
            return {xi, delta};
    }
}

bool converged_certificate(const MinimizeResult& res, double min_dist,
                           std::string& detail) {
    bool ok = res.converged && res.gradient_norm <= 1e-8 &&
              res.equivariance <= 1e-10 && res.report.newton_residual <= 1e-6 &&
              res.report.energy_drift <= 1e-6 &&
              res.report.min_pairwise_distance >= min_dist;
    detail = fmt("action %.9f gn %.2e equiv %.2e newton %.2e drift %.2e dmin %.3f",
                 res.report.action, res.gradient_norm, res.equivariance,
                 res.report.newton_residual, res.report.energy_drift,
                 res.report.min_pairwise_distance);
    return ok;
}

// --- criteria ---------------------------------------------------------------

bool series_vs_quadrature(std::string& detail) {
    bool ok = true;
    for (double alpha : {0.5, 1.0, 1.5}) {
        double s = eval_Stilde_series(alpha).value_series;
        CircleSpec circle;
        circle.e1 = Vector3d(1, 0, 0);
        circle.e2 = Vector3d(0, 1, 0);
        circle.radius = 1.0;
        double q = eval_Stilde_quadrature(Vector3d(1, 0, 0), circle, alpha);
        double gap = std::abs(s - q);
        ok = ok && s < 0.0 && q < 0.0 &&
             gap <= std::max(1e-6, 1e-6 * std::abs(s));
        detail += fmt("a=%.1f s=%.9f gap=%.1e  ", alpha, s, gap);
    }
    return ok;
}

bool negativity_margin(std::string& detail) {
    bool ok = true;
    for (double alpha : {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75}) {
        double s = eval_Stilde_series(alpha).value_series;
        double ub = stilde_upper_bound(alpha);
        ok = ok && s <= ub - 1e-9 && ub <= -1e-9;
    }
    detail = "series below closed-form bound, bound below zero, margin 1e-9";
    return ok;
}

bool tilt_monotone(std::string& detail) {
    bool ok = true;
    std::vector<double> gammas(21);
    for (int j = 0; j < 21; ++j) gammas[j] = (pi / 2) * j / 20.0;
    for (double alpha : {0.5, 1.0, 1.5}) {
        auto prof = gamma_profile(alpha, gammas);
        for (size_t j = 1; j < prof.size(); ++j)
            ok = ok && prof[j] <= prof[j - 1] + 1e-9;
        for (size_t j = 0; j < prof.size(); ++j) {
            double bound =
                std::pow(std::cos(gammas[j]), 1.0 - alpha / 2.0) * prof[0];
            ok = ok && prof[j] <= bound + 1e-9;
        }
        detail += fmt("a=%.1f range [%.4f, %.4f]  ", alpha, prof.back(), prof[0]);
    }
    return ok;
}

bool scaling_identities(std::string& detail) {
    std::mt19937_64 rng(4242);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        double alpha = 0.5 + 0.5 * (trial % 3);
        auto [xi, delta] = safe_pair(rng);
        double lam = std::exp(0.8 * std::sin(trial + 1.0));
        double base = eval_S_quadrature(xi, delta, alpha);
        double rx = std::abs(eval_S_quadrature((lam * xi).eval(), delta, alpha) -
                             std::pow(lam, -1.0 - alpha / 2.0) * base);
        double rd = std::abs(eval_S_quadrature(xi, (lam * delta).eval(), alpha) -
                             std::pow(lam, 1.0 - alpha / 2.0) * base);
        double scale = std::max(1.0, std::abs(base));
        worst = std::max({worst, rx / scale, rd / scale});
    }
    detail = fmt("worst relative defect %.2e over 100 random pairs", worst);
    return worst <= 1e-7;
}

bool expansion_law(std::string& detail) {
    auto fx = equilateral_fixture(1.0);
    Vector3d dir(std::cos(0.7), 0.0, std::sin(0.7));
    const double sizes[4] = {0.08, 0.04, 0.02, 0.01};
    double pred[4], resid[4];
    for (int s = 0; s < 4; ++s) {
        MatrixXd delta = MatrixXd::Zero(3, 3);
        delta.row(0) = sizes[s] * dir.transpose();
        auto ex = delta_action_expansion(fx, delta, 1.0);
        pred[s] = ex.prediction;
        resid[s] = ex.residual;
    }
    bool ok = true;
    for (int s = 0; s < 4; ++s) ok = ok && pred[s] < 0.0;
    const double root2 = std::sqrt(2.0);
    for (int s = 0; s + 1 < 4; ++s) {
        double pr = pred[s] / pred[s + 1];
        double rr = resid[s] / resid[s + 1];
        ok = ok && std::abs(pr - root2) <= 0.02 * root2 && rr >= 1.7 && rr <= 2.3;
        detail += fmt("pred %.4f resid %.2f  ", pr, rr);
    }
    return ok;
}

bool catalog_facts(std::string& detail) {
    bool ok = true;
    int checked = 0;
    for (const auto& e : catalog_entries()) {
        auto rep = rotating_circle_property(catalog_build(e.name));
        bool match = rep.coercive == e.expected.coercive &&
                     rep.classification.type == e.expected.action_type &&
                     rep.rcp_maximal == e.expected.rcp_maximal &&
                     rep.rcp_kertau == e.expected.rcp_kertau &&
                     rep.theorem_applicable == e.expected.theorem_applicable;
        if (!match) detail += fmt("mismatch: %s  ", e.name.c_str());
        ok = ok && match;
        ++checked;
    }
    auto d4q = rotating_circle_property(catalog_build("d4q_c2"));
    ok = ok && !d4q.rcp_maximal && d4q.rcp_kertau && !d4q.theorem_applicable;
    ok = ok && rotating_circle_property(catalog_build("two_triangles")).theorem_applicable;
    ok = ok &&
         rotating_circle_property(catalog_build("two_triangles_spatial")).theorem_applicable;
    detail += fmt("%d entries recomputed", checked);
    return ok;
}

bool eight_minimizer(std::string& detail) {
    auto action = catalog_build("eight_dihedral");
    MinimizeConfig cfg;
    cfg.samples = 256;
    auto res = minimize_action(action, cfg);
    bool ok = converged_certificate(res, 0.01, detail);

    GroupElement shift;
    shift.tau = TimeTransform::rotation(Rational(-1, 3));
    shift.rho = MatrixXd::Identity(2, 2);
    shift.sigma = Perm(std::vector<int>{1, 2, 0});
    int e = action.find(shift);
    if (e < 0) return false;
    double chor = loop_sup_distance(act(action, e, res.loop), res.loop);
    detail += fmt(" chor %.1e", chor);
    return ok && chor <= 1e-10;
}

bool hiphop_minimizer(std::string& detail) {
    auto action = catalog_build("hiphop");
    MinimizeConfig cfg;
    cfg.samples = 256;
    auto res = minimize_action(action, cfg);
    bool ok = converged_certificate(res, 0.01, detail);
    double maxz = 0.0;
    for (int j = 0; j < res.loop.M; ++j)
        for (int i = 0; i < res.loop.n; ++i)
            maxz = std::max(maxz, std::abs(res.loop.at(j, i, 2)));
    detail += fmt(" maxz %.4f", maxz);
    return ok && maxz > 1e-3;
}

bool quadratic_forms(std::string& detail) {
    bool ok = true;
    for (double alpha : {1.0, 1.5}) {
        double q = hessian_quadratic_form(lagrange_reference(3, alpha, 512),
                                          vertical_variation(3, 512), alpha);
        ok = ok && std::abs(q - (-27.0 * pi)) <= 0.01 * 27.0 * pi;
        detail += fmt("k=3 a=%.1f %.4f  ", alpha, q / pi);
    }
    double q2 = hessian_quadratic_form(lagrange_reference(2, 1.0, 512),
                                       vertical_variation(2, 512), 1.0);
    ok = ok && std::abs(q2 - 6.0 * pi) <= 0.01 * 6.0 * pi;
    detail += fmt("k=2 a=1.0 %.4f (units of pi, want -27 -27 +6)", q2 / pi);
    return ok;
}

bool reference_stationarity(std::string& detail) {
    bool ok = true;
    for (auto [k, alpha] : {std::pair{2, 1.0}, {3, 1.0}, {3, 1.5}}) {
        double r = newton_residual(lagrange_reference(k, alpha, 512), alpha);
        ok = ok && r <= 1e-6;
        detail += fmt("k=%d a=%.1f resid %.3f  ", k, alpha, r);
    }
    detail += "(want <= 1e-6; see README on the reference radius)";
    return ok;
}

bool discretization_properties(std::string& detail) {
    std::mt19937_64 rng(11);
    MatrixXd Om = MatrixXd::Zero(2, 2);
    Om(0, 1) = -0.7;
    Om(1, 0) = 0.7;
    bool ok = true;

    double worst_fd = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        Loop lp = random_loop(3, 2, 32, 1.0, rng);
        double alpha = 0.5 + 0.5 * (rep % 3);
        double eps = (rep % 4 == 0) ? 0.05 : 0.0;
        std::optional<MatrixXd> frame;
        if (rep % 5 == 0) frame = Om;
        VectorXd g = action_gradient(lp, alpha, frame, eps);
        std::uniform_int_distribution<long> pick(0, lp.size() - 1);
        for (int probe = 0; probe < 6; ++probe) {
            long idx = pick(rng);
            double h = 1e-6 * std::max(1.0, std::abs(lp.x[idx]));
            Loop lpp = lp, lpm = lp;
            lpp.x[idx] += h;
            lpm.x[idx] -= h;
            double fd = (action_value(lpp, alpha, frame, eps) -
                         action_value(lpm, alpha, frame, eps)) /
                        (2 * h);
            worst_fd = std::max(worst_fd, std::abs(fd - g[idx]) /
                                              std::max(1.0, std::abs(fd)));
        }
    }
    ok = ok && worst_fd <= 1e-6;

    auto action = catalog_build("eight_dihedral");
    Loop lp = random_loop(3, 2, 48, 1.0, rng);
    Loop p1 = project_equivariant(lp, action);
    Loop p2 = project_equivariant(p1, action);
    double idem = loop_sup_distance(p1, p2);
    Loop res = lp;
    res.x = lp.x - p1.x;
    double orth = std::abs(l2_inner(res, p1)) /
                  std::max(1.0, l2_norm(lp) * l2_norm(lp));
    ok = ok && idem <= 1e-12 && orth <= 1e-12;

    Loop lp4 = random_loop(4, 3, 32, 1.0, rng);
    auto es = energy_series(lp4, 1.0);
    auto pa = partial_quantities(lp4, 1.0, {0, 2});
    auto pb = partial_quantities(lp4, 1.0, {1, 3});
    double part = 0.0;
    for (int j = 0; j < lp4.M; ++j) {
        part = std::max(part, std::abs(pa.kinetic[j] + pb.kinetic[j] -
                                       es.kinetic[j]));
        part = std::max(part, std::abs(pa.potential[j] + pb.potential[j] +
                                       pa.cross[j] - es.potential[j]));
    }
    ok = ok && part <= 1e-12;

    double homo = 0.0, balance = 0.0;
    auto fx = equilateral_fixture(1.0);
    const double beta = 2.0 / (2.0 + fx.alpha);
    for (double kappa : {1.0, parabolic_kappa(fx.s, fx.masses, fx.alpha)}) {
        fx.kappa = kappa;
        for (double t : {0.3, 1.0, 2.7}) {
            MatrixXd q = homothetic_ejection(fx, t);
            double I = 0.0;
            for (int i = 0; i < 3; ++i)
                I += fx.masses[i] * q.row(i).squaredNorm();
            double want = std::pow(kappa * t, 2.0 * beta);
            homo = std::max(homo, std::abs(I - want) / want);
        }
    }
    fx.kappa = parabolic_kappa(fx.s, fx.masses, fx.alpha);
    for (double t : {0.4, 1.0, 3.1}) {
        MatrixXd q = homothetic_ejection(fx, t);
        MatrixXd v = homothetic_ejection_velocity(fx, t);
        double K = 0.0, U = 0.0;
        for (int i = 0; i < 3; ++i) {
            K += 0.5 * fx.masses[i] * v.row(i).squaredNorm();
            for (int j = i + 1; j < 3; ++j)
                U += fx.masses[i] * fx.masses[j] /
                     (q.row(i) - q.row(j)).norm();
        }
        balance = std::max(balance, std::abs(K - U) / U);
    }
    ok = ok && homo <= 1e-10 && balance <= 1e-10;

    detail = fmt("fd %.1e idem %.1e orth %.1e part %.1e homo %.1e K=U %.1e",
                 worst_fd, idem, orth, part, homo, balance);
    return ok;
}

bool noncoercive_escape(std::string& detail) {
    GroupElement id;
    id.tau = TimeTransform::identity();
    id.rho = MatrixXd::Identity(2, 2);
    id.sigma = Perm(2);
    auto action = close_group({id}, 2, 2, 1.0, 1.0, VectorXd::Ones(2));

    MinimizeConfig cfg;
    cfg.samples = 32;
    cfg.max_iterations = 400;
    cfg.mollifier_schedule = {0.0};
    auto res = minimize_action(action, cfg);
    detail = fmt("converged %d inertia %.2f -> %.2f", int(res.converged),
                 res.initial_inertia, res.final_inertia);
    return !res.converged && res.inertia_growing;
}

} // namespace

int main() {
    struct Criterion {
        const char* label;
        std::function<bool(std::string&)> run;
    };
    const std::vector<Criterion> criteria = {
        {"circle-average series and quadrature agree", series_vs_quadrature},
        {"circle average negative with closed-form margin", negativity_margin},
        {"tilted circle average monotone under the cosine bound", tilt_monotone},
        {"pairwise integral scaling identities", scaling_identities},
        {"action difference follows the first-order law", expansion_law},
        {"catalog facts reproduced by the analysis", catalog_facts},
        {"figure-eight minimizer certificate", eight_minimizer},
        {"hip-hop minimizer certificate and nonplanarity", hiphop_minimizer},
        {"vertical quadratic forms at the reference orbit", quadratic_forms},
        {"reference orbit stationarity", reference_stationarity},
        {"discretization property checks", discretization_properties},
        {"non-coercive action escapes to infinity", noncoercive_escape},
    };

    int failures = 0;
    for (size_t c = 0; c < criteria.size(); ++c) {
        auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = criteria[c].run(detail);
        } catch (const std::exception& ex) {
            detail = fmt("exception: %s", ex.what());
        }
        double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
        std::printf("criterion %02zu %s %s [%.1fs] %s\n", c + 1,
                    ok ? "PASS" : "FAIL", criteria[c].label, secs,
                    detail.c_str());
        if (!ok) ++failures;
    }
    std::printf("acceptance: %zu/%zu criteria passed\n",
                criteria.size() - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
