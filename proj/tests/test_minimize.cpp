#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "nbsym/catalog.hpp"
#include "nbsym/loops.hpp"
#include "nbsym/minimize.hpp"

using namespace nbsym;

namespace {

constexpr double pi = std::numbers::pi;

double mean_inertia(const Loop& loop) {
    double acc = 0.0;
    for (int j = 0; j < loop.M; ++j)
        for (int i = 0; i < loop.n; ++i)
            acc += loop.masses[i] * loop.body(j, i).squaredNorm();
    return acc / loop.M;
}

GroupAction trivial_two_body() {
    GroupElement id;
    id.tau = TimeTransform::identity();
    id.rho = Eigen::MatrixXd::Identity(2, 2);
    id.sigma = Perm(2);
    return close_group({id}, 2, 2, 1.0, 1.0, Eigen::VectorXd::Ones(2));
}

// action of the rotating equilateral choreography: three unit masses on a
// circle of radius R, one revolution per period, R^3 = 1/(sqrt(3) w^2)
double lagrange_circle_action(double T) {
    const double w = 2.0 * pi / T;
    const double R = std::cbrt(1.0 / (std::sqrt(3.0) * w * w));
    return T * (1.5 * R * R * w * w + std::sqrt(3.0) / R);
}

} // namespace

TEST_CASE("seed loops are deterministic and well formed") {
    auto action = catalog_build("eight_dihedral");
    MinimizeConfig cfg;
    cfg.samples = 64;
    cfg.seed = 7;

    Loop a = seed_loop(action, cfg);
    Loop b = seed_loop(action, cfg);
    REQUIRE(a.x.size() == b.x.size());
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);

    cfg.seed = 8;
    Loop c = seed_loop(action, cfg);
    CHECK((a.x - c.x).cwiseAbs().maxCoeff() > 1e-6);

    for (const Loop* s : {&a, &c}) {
        CHECK(equivariance_residual(*s, action) <= 1e-12);
        CHECK(centering_residual(*s) <= 1e-12);
        CHECK(std::abs(mean_inertia(*s) - 1.0) <= 1e-12);
        CHECK(min_pairwise_distance(*s) >= 1e-3);
    }
}

TEST_CASE("configuration validation") {
    auto action = catalog_build("choreography");
    MinimizeConfig cfg;
    cfg.samples = 4;
    CHECK_THROWS_AS(seed_loop(action, cfg), std::invalid_argument);
    cfg.samples = 64;
    cfg.mollifier_schedule = {0.05, 0.01};
    CHECK_THROWS_AS(minimize_action(action, cfg), std::invalid_argument);
    cfg.mollifier_schedule = {0.01, 0.05, 0.0};
    CHECK_THROWS_AS(minimize_action(action, cfg), std::invalid_argument);
    cfg.mollifier_schedule = {};
    CHECK_THROWS_AS(minimize_action(action, cfg), std::invalid_argument);
    cfg.mollifier_schedule = {0.0};
    cfg.max_iterations = 0;
    CHECK_THROWS_AS(minimize_action(action, cfg), std::invalid_argument);
}

TEST_CASE("figure-eight class minimizer at M = 128") {
    auto action = catalog_build("eight_dihedral");
    MinimizeConfig cfg;
    cfg.samples = 128;

    auto res = minimize_action(action, cfg);
    CHECK(res.converged);
    CHECK(res.gradient_norm <= 1e-8);
    CHECK(res.equivariance <= 1e-10);
    CHECK(res.report.newton_residual <= 1e-6);
    CHECK(res.report.energy_drift <= 1e-6);
    CHECK(res.report.min_pairwise_distance >= 0.05);
    CHECK(std::abs(res.report.action - 13.2077823) <= 1e-4);
    CHECK(res.action_history.size() >= 2);
    CHECK(res.message == "converged");

    SUBCASE("runs are reproducible bit for bit") {
        auto rerun = minimize_action(action, cfg);
        CHECK(rerun.report.action == res.report.action);
        CHECK((rerun.loop.x - res.loop.x).cwiseAbs().maxCoeff() == 0.0);
        CHECK(rerun.iterations == res.iterations);
    }

    SUBCASE("a converged loop is a fixed point of further descent") {
        MinimizeConfig again = cfg;
        again.mollifier_schedule = {0.0};
        again.max_iterations = 50;
        auto res2 = minimize_from(action, again, res.loop);
        CHECK(std::abs(res2.report.action - res.report.action) <=
              1e-10 * std::abs(res.report.action));
    }
}

TEST_CASE("descent is monotone within a mollifier phase") {
    auto action = catalog_build("choreography");
    MinimizeConfig cfg;
    cfg.samples = 64;
    cfg.mollifier_schedule = {0.0};

    auto res = minimize_action(action, cfg);
    REQUIRE(res.action_history.size() >= 2);
    for (size_t j = 1; j < res.action_history.size(); ++j) {
        double prev = res.action_history[j - 1];
        // floating-point floor: steps accepted near roundoff may tick upward
        CHECK(res.action_history[j] <= prev + 1e-11 * std::max(1.0, std::abs(prev)));
    }
}

TEST_CASE("multi-seed search finds the rotating triangle") {
    auto action = catalog_build("choreography");
    MinimizeConfig cfg;
    cfg.samples = 64;

    auto ms = multi_seed(action, cfg, 3);
    CHECK(ms.best.converged);
    CHECK(std::abs(ms.best.report.action - lagrange_circle_action(action.period)) <=
          1e-6);

    REQUIRE(!ms.clusters.empty());
    int total = 0;
    for (const auto& c : ms.clusters) {
        CHECK(c.count == static_cast<int>(c.seeds.size()));
        total += c.count;
        CHECK(c.converged);
        CHECK(ms.best.report.action <= c.action + 1e-12);
    }
    CHECK(total <= 3);
    CHECK(total >= 1);

    SUBCASE("count = 1 reduces to a single run") {
        auto one = multi_seed(action, cfg, 1);
        auto direct = minimize_action(action, cfg);
        CHECK(one.best.report.action == direct.report.action);
        CHECK((one.best.loop.x - direct.loop.x).cwiseAbs().maxCoeff() == 0.0);
    }

    CHECK_THROWS_AS(multi_seed(action, cfg, 0), std::invalid_argument);
}

TEST_CASE("quadratic form of the action hessian") {
    Loop v = vertical_variation(2, 512);

    double q2 = hessian_quadratic_form(lagrange_reference(2, 1.0, 512), v, 1.0);
    CHECK(std::abs(q2 - 6.0 * pi) <= 0.01 * 6.0 * pi);

    Loop v3 = vertical_variation(3, 512);
    double q3 = hessian_quadratic_form(lagrange_reference(3, 1.0, 512), v3, 1.0);
    CHECK(std::abs(q3 - (-27.0 * pi)) <= 0.01 * 27.0 * pi);

    SUBCASE("homogeneity of degree two in the direction") {
        Loop v2 = v;
        v2.x *= 2.0;
        double q = hessian_quadratic_form(lagrange_reference(2, 1.0, 512), v2, 1.0);
        CHECK(std::abs(q - 4.0 * q2) <= 0.01 * std::abs(4.0 * q2));
    }

    SUBCASE("step-size consistency") {
        double qh = hessian_quadratic_form(lagrange_reference(2, 1.0, 512), v, 1.0,
                                           5e-4);
        CHECK(std::abs(qh - q2) <= 1e-4 * std::abs(q2));
    }

    SUBCASE("input validation") {
        Loop bad = vertical_variation(2, 256);
        CHECK_THROWS_AS(hessian_quadratic_form(lagrange_reference(2, 1.0, 512), bad, 1.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(hessian_quadratic_form(lagrange_reference(2, 1.0, 512), v, 1.0, 0.0),
                        std::invalid_argument);
    }
}

TEST_CASE("non-coercive problems escape to infinity") {
    auto action = trivial_two_body();
    MinimizeConfig cfg;
    cfg.samples = 32;
    cfg.max_iterations = 400;
    cfg.mollifier_schedule = {0.0};

    auto res = minimize_action(action, cfg);
    CHECK(!res.converged);
    CHECK(res.inertia_growing);
    CHECK(res.final_inertia > 4.0 * res.initial_inertia);
    CHECK(res.message == "iteration budget exhausted with growing inertia "
                         "(non-coercive escape)");
}
