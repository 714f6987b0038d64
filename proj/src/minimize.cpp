#include "nbsym/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <random>
#include <stdexcept>

#include "nbsym/symmetry.hpp"

namespace nbsym {

namespace {

constexpr double kCollision = 1e-9;
constexpr double kTwoPi = 6.283185307179586476925;

void check_config(const MinimizeConfig& config) {
    if (config.samples < 8) throw std::invalid_argument("need samples >= 8");
    if (config.max_iterations < 1)
        throw std::invalid_argument("max_iterations must be positive");
    if (config.memory < 1) throw std::invalid_argument("memory must be positive");
    if (config.mollifier_schedule.empty() ||
        config.mollifier_schedule.back() != 0.0)
        throw std::invalid_argument("mollifier schedule must end at 0");
    for (size_t i = 1; i < config.mollifier_schedule.size(); ++i)
        if (config.mollifier_schedule[i] >= config.mollifier_schedule[i - 1])
            throw std::invalid_argument("mollifier schedule must be decreasing");
}

double mean_inertia(const Loop& loop) {
    double acc = 0.0;
    for (int j = 0; j < loop.M; ++j)
        for (int i = 0; i < loop.n; ++i)
            acc += loop.masses[i] * loop.body(j, i).squaredNorm();
    return acc / loop.M;
}

// Mass-weighted L2 norm of the gradient density (the vector g carries the
// quadrature weight T/M, which is divided back out).
double gradient_norm(const Loop& shape, const Eigen::VectorXd& g) {
    const double w = shape.T / shape.M;
    double acc = 0.0;
    for (int j = 0; j < shape.M; ++j)
        for (int i = 0; i < shape.n; ++i) {
            const long off = (static_cast<long>(j) * shape.n + i) * shape.d;
            acc += shape.masses[i] * g.segment(off, shape.d).squaredNorm() / (w * w);
        }
    return std::sqrt(acc * w);
}

Eigen::VectorXd project_vec(const GroupAction& action, const Loop& shape,
                            const Eigen::VectorXd& v) {
    Loop tmp = shape;
    tmp.x = v;
    return project_equivariant(tmp, action).x;
}

struct Objective {
    const GroupAction* action;
    const MinimizeConfig* config;
    double eps;

    double value(const Loop& x) const {
        return action_value(x, action->alpha, config->rotating_frame, eps);
    }
    Eigen::VectorXd gradient(const Loop& x) const {
        Eigen::VectorXd g =
            action_gradient(x, action->alpha, config->rotating_frame, eps);
        return project_vec(*action, x, g);
    }
};

struct Phase {
    int iterations = 0;
    double gnorm = 0.0;
    bool reached = false;
    bool line_search_failed = false;
};

// Projected L-BFGS with the spectral H1 metric as the base inverse Hessian.
Phase lbfgs_phase(const Objective& obj, Loop& x, double tol, int budget,
                  std::vector<double>& history) {
    const MinimizeConfig& cfg = *obj.config;
    std::deque<Eigen::VectorXd> S, Y;
    std::deque<double> RHO;

    double fx = obj.value(x);
    if (!std::isfinite(fx))
        throw std::runtime_error("starting loop has non-finite action");
    Eigen::VectorXd g = obj.gradient(x);

    Phase ph;
    bool first_step = true;
    for (int it = 0; it < budget; ++it) {
        ph.gnorm = gradient_norm(x, g);
        if (ph.gnorm <= tol) {
            ph.reached = true;
            ph.iterations = it;
            return ph;
        }

        // Two-loop recursion seeded with the preconditioner.
        Eigen::VectorXd q = g;
        std::vector<double> a(S.size());
        for (int k = static_cast<int>(S.size()) - 1; k >= 0; --k) {
            a[k] = RHO[k] * S[k].dot(q);
            q -= a[k] * Y[k];
        }
        Eigen::VectorXd p = h1_precondition(x, q);
        for (size_t k = 0; k < S.size(); ++k) {
            const double b = RHO[k] * Y[k].dot(p);
            p += (a[k] - b) * S[k];
        }

        double slope = g.dot(p);
        if (!(slope > 0.0)) {
            S.clear(); Y.clear(); RHO.clear();
            p = h1_precondition(x, g);
            slope = g.dot(p);
            if (!(slope > 0.0)) {
                ph.iterations = it;
                ph.line_search_failed = true;
                return ph;
            }
        }

        double step = 1.0;
        if (first_step) {
            step = std::min(1.0, 1.0 / std::max(1e-12, std::sqrt(g.dot(g))));
            first_step = false;
        }

        // Near the minimum the Armijo decrement drops below the resolution of
        // fx itself; from there on, accept any step that does not measurably
        // increase the action (the gradient test still decides convergence).
        const double quantum = 64.0 * std::numeric_limits<double>::epsilon() *
                               std::max(1.0, std::abs(fx));
        bool accepted = false;
        Loop xt = x;
        double ft = fx;
        for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
            xt.x = x.x - step * p;
            ft = obj.value(xt);
            const bool finite = std::isfinite(ft);
            const bool clear = min_pairwise_distance(xt) > kCollision;
            const double needed = cfg.sufficient_decrease * step * slope;
            if (finite && clear &&
                (ft <= fx - needed || (needed < quantum && ft <= fx + quantum))) {
                accepted = true;
                break;
            }
            step *= cfg.backtrack;
        }
        if (!accepted) {
            if (!S.empty()) {
                S.clear(); Y.clear(); RHO.clear();
                continue;  // retry from steepest descent
            }
            ph.iterations = it + 1;
            ph.line_search_failed = true;
            return ph;
        }

        xt.x = project_vec(*obj.action, xt, xt.x);
        Eigen::VectorXd gt = obj.gradient(xt);

        Eigen::VectorXd s = xt.x - x.x;
        Eigen::VectorXd yv = gt - g;
        const double sy = s.dot(yv);
        if (sy > 1e-16 * yv.squaredNorm()) {
            S.push_back(std::move(s));
            Y.push_back(std::move(yv));
            RHO.push_back(1.0 / sy);
            if (static_cast<int>(S.size()) > cfg.memory) {
                S.pop_front(); Y.pop_front(); RHO.pop_front();
            }
        }

        x = std::move(xt);
        fx = ft;
        g = std::move(gt);
        history.push_back(fx);
        ph.iterations = it + 1;
    }
    ph.gnorm = gradient_norm(x, g);
    ph.reached = ph.gnorm <= tol;
    return ph;
}

} // namespace

Loop seed_loop(const GroupAction& action, const MinimizeConfig& config) {
    check_config(config);
    if (!coercivity_test(action))
        std::fprintf(stderr, "seed_loop: action is not coercive; the minimizer "
                             "may escape to infinity\n");

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Loop loop = make_loop(action, config.samples);

    for (int attempt = 0; attempt < 100; ++attempt) {
        for (int i = 0; i < action.n; ++i)
            for (int c = 0; c < action.d; ++c) {
                const double a0 = normal(rng);
                std::vector<double> ak(config.fourier_mode_cap + 1);
                std::vector<double> bk(config.fourier_mode_cap + 1);
                for (int k = 1; k <= config.fourier_mode_cap; ++k) {
                    ak[k] = normal(rng) / k;
                    bk[k] = normal(rng) / k;
                }
                for (int j = 0; j < loop.M; ++j) {
                    double t = kTwoPi * j / loop.M;
                    double v = a0;
                    for (int k = 1; k <= config.fourier_mode_cap; ++k)
                        v += ak[k] * std::cos(k * t) + bk[k] * std::sin(k * t);
                    loop.at(j, i, c) = v;
                }
            }
        center_masses(loop);
        loop = project_equivariant(loop, action);
        const double inertia = mean_inertia(loop);
        if (inertia < 1e-12) continue;
        loop.x /= std::sqrt(inertia);
        if (min_pairwise_distance(loop) >= 1e-3) return loop;
    }
    throw std::runtime_error("seed_loop: could not produce a collision-free "
                             "seed; the action may be bound to collisions");
}

MinimizeResult minimize_from(const GroupAction& action,
                             const MinimizeConfig& config, const Loop& start) {
    check_config(config);
    MinimizeResult res;
    Loop x = start;
    center_masses(x);
    x = project_equivariant(x, action);
    res.initial_inertia = mean_inertia(x);

    Objective obj{&action, &config, 0.0};
    int remaining = config.max_iterations;
    Phase last;
    for (size_t pi = 0; pi < config.mollifier_schedule.size(); ++pi) {
        obj.eps = config.mollifier_schedule[pi];
        const bool final_phase = pi + 1 == config.mollifier_schedule.size();
        const double tol = final_phase ? config.gradient_tolerance
                                       : config.intermediate_tolerance;
        last = lbfgs_phase(obj, x, tol, remaining, res.action_history);
        res.iterations += last.iterations;
        remaining -= last.iterations;
        if (remaining <= 0) break;
    }

    res.loop = x;
    res.gradient_norm = last.gnorm;
    res.equivariance = equivariance_residual(x, action);
    res.final_inertia = mean_inertia(x);
    res.inertia_growing = res.final_inertia > 4.0 * std::max(res.initial_inertia, 1e-12);
    res.report = action_report(x, action.alpha);
    if (config.rotating_frame)
        res.report.action = action_value(x, action.alpha, config.rotating_frame);
    res.converged = last.reached &&
                    res.report.min_pairwise_distance > kCollision &&
                    res.gradient_norm <= config.gradient_tolerance;
    if (res.converged) {
        res.message = "converged";
    } else if (last.line_search_failed) {
        res.message = "line search failed before reaching tolerance";
    } else if (res.inertia_growing) {
        res.message = "iteration budget exhausted with growing inertia "
                      "(non-coercive escape)";
    } else {
        res.message = "iteration budget exhausted";
    }
    return res;
}

MinimizeResult minimize_action(const GroupAction& action,
                               const MinimizeConfig& config) {
    return minimize_from(action, config, seed_loop(action, config));
}

MultiSeedResult multi_seed(const GroupAction& action,
                           const MinimizeConfig& config, int count) {
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    MultiSeedResult out;
    std::vector<std::pair<std::uint64_t, MinimizeResult>> runs;
    for (int k = 0; k < count; ++k) {
        MinimizeConfig c = config;
        c.seed = config.seed + static_cast<std::uint64_t>(k);
        try {
            runs.emplace_back(c.seed, minimize_action(action, c));
        } catch (const std::exception& e) {
            std::fprintf(stderr, "multi_seed: seed %llu failed: %s\n",
                         static_cast<unsigned long long>(c.seed), e.what());
        }
    }
    if (runs.empty())
        throw std::runtime_error("multi_seed: every run failed");

    std::sort(runs.begin(), runs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    for (const auto& [seed, r] : runs) {
        bool placed = false;
        for (auto& cl : out.clusters) {
            const double scale = std::max(1.0, std::abs(cl.action));
            if (cl.converged == r.converged &&
                std::abs(cl.action - r.report.action) <= 1e-4 * scale) {
                cl.count += 1;
                cl.seeds.push_back(seed);
                placed = true;
                break;
            }
        }
        if (!placed) {
            SeedCluster cl;
            cl.action = r.report.action;
            cl.count = 1;
            cl.seeds = {seed};
            cl.converged = r.converged;
            out.clusters.push_back(cl);
        }
    }

    const MinimizeResult* best = nullptr;
    for (const auto& [seed, r] : runs) {
        if (!best) { best = &r; continue; }
        const bool better_class = r.converged && !best->converged;
        const bool same_class = r.converged == best->converged;
        if (better_class ||
            (same_class && r.report.action < best->report.action))
            best = &r;
    }
    out.best = *best;
    return out;
}

double hessian_quadratic_form(const Loop& x, const Loop& v, double alpha,
                              double h) {
    if (x.x.size() != v.x.size())
        throw std::invalid_argument("direction shape mismatch");
    if (!(h > 0.0)) throw std::invalid_argument("step must be positive");
    auto quad = [&](double hh) {
        Loop plus = x, minus = x;
        plus.x = x.x + hh * v.x;
        minus.x = x.x - hh * v.x;
        const double a0 = action_value(x, alpha);
        const double ap = action_value(plus, alpha);
        const double am = action_value(minus, alpha);
        if (!std::isfinite(a0) || !std::isfinite(ap) || !std::isfinite(am))
            throw std::domain_error("collision inside the difference stencil");
        return (ap - 2.0 * a0 + am) / (hh * hh);
    };
    const double q1 = quad(h);
    const double q2 = quad(h / 2.0);
    return q2 + (q2 - q1) / 3.0;
}

} // namespace nbsym
