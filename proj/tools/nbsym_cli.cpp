// Command line front end: group analysis, minimization, averaging checks and
// trajectory verification. Exit codes: 0 success, 1 verification/convergence
// failure, 2 bad input.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nbsym/averaging.hpp"
#include "nbsym/catalog.hpp"
#include "nbsym/group.hpp"
#include "nbsym/io.hpp"
#include "nbsym/loops.hpp"
#include "nbsym/minimize.hpp"

using namespace nbsym;
using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
    std::map<std::string, double> out;
    for (const auto& kv : kvs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("expected --param key=value, got: " + kv);
        out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    return out;
}

GroupAction load_target(const std::string& target,
                        const std::map<std::string, double>& params) {
    if (std::filesystem::exists(target)) {
        if (!params.empty())
            throw std::invalid_argument("--param only applies to catalog names");
        return load_action(target);
    }
    return catalog_build(target, params);
}

void print_analysis(const GroupAction& action) {
    json j = analysis_to_json(action);
    std::printf("group order %d acting on %d bodies in R^%d, alpha %g, period %g\n",
                action.order(), action.n, action.d, action.alpha, action.period);
    std::printf("coercive:            %s\n", j["coercive"].get<bool>() ? "yes" : "no");
    std::printf("action type:         %s (%d time-isotropy classes)\n",
                j["action_type"].get<std::string>().c_str(),
                j["isotropy_count"].get<int>());
    std::printf("fundamental domain:  [%s, %s] T, boundary orders %d, %d\n",
                j["fundamental_domain"][0].get<std::string>().c_str(),
                j["fundamental_domain"][1].get<std::string>().c_str(),
                j["boundary_isotropy_orders"][0].get<int>(),
                j["boundary_isotropy_orders"][1].get<int>());
    std::printf("reducibility:        subspace %s, period %s\n",
                j["subspace_trigger"].get<bool>() ? "TRIGGERED" : "clean",
                j["period_trigger"].get<bool>() ? "TRIGGERED" : "clean");
    std::printf("collision bound:     %s\n",
                j["collision_bound"].get<std::string>().c_str());
    std::printf("time isotropy classes:\n");
    for (const auto& e : j["isotropy"]) {
        std::printf("  t = %-6s order %2d %-8s movable %zu%s rcp %s\n",
                    e["time"].get<std::string>().c_str(), e["order"].get<int>(),
                    e["maximal"].get<bool>() ? "maximal" : "",
                    e["movable"].size(),
                    e["acts_trivially"].get<bool>() ? " (acts trivially)" : "",
                    e["rcp"].get<bool>() ? "yes" : "NO");
    }
    std::printf("rcp on maximal classes: %s\n",
                j["rcp_maximal"].get<bool>() ? "yes" : "NO");
    std::printf("rcp on ker tau:         %s\n",
                j["rcp_kertau"].get<bool>() ? "yes" : "NO");
    std::printf("existence theorem:      %s\n",
                j["theorem_applicable"].get<bool>() ? "applicable"
                                                    : "NOT APPLICABLE");
}

json minimize_to_json(const MultiSeedResult& ms, const std::string& out_path) {
    const MinimizeResult& r = ms.best;
    json j;
    j["converged"] = r.converged;
    j["message"] = r.message;
    j["iterations"] = r.iterations;
    j["gradient_norm"] = r.gradient_norm;
    j["equivariance"] = r.equivariance;
    j["report"] = report_to_json(r.report);
    json cl = json::array();
    for (const auto& c : ms.clusters)
        cl.push_back({{"action", c.action}, {"count", c.count}, {"seeds", c.seeds}});
    j["clusters"] = cl;
    if (!out_path.empty()) j["trajectory"] = out_path;
    return j;
}

int run_minimize(const std::string& target,
                 const std::map<std::string, double>& params, int samples,
                 std::uint64_t seed, double tol, int count,
                 const std::string& out_path, bool as_json) {
    GroupAction action = load_target(target, params);
    MinimizeConfig cfg;
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.gradient_tolerance = tol;
    MultiSeedResult ms = multi_seed(action, cfg, count);

    if (!out_path.empty() && ms.best.converged)
        write_trajectory(out_path, ms.best.loop, action, ms.best.report);

    if (as_json) {
        std::printf("%s\n", minimize_to_json(ms, out_path).dump(2).c_str());
    } else {
        const auto& r = ms.best;
        std::printf("%s after %d iterations\n", r.message.c_str(), r.iterations);
        std::printf("action   %.12g  (kinetic %.12g, potential %.12g)\n",
                    r.report.action, r.report.kinetic_integral,
                    r.report.potential_integral);
        std::printf("gradient %.3e  equivariance %.3e  newton %.3e\n",
                    r.gradient_norm, r.equivariance, r.report.newton_residual);
        std::printf("energy drift %.3e  min distance %.4f\n",
                    r.report.energy_drift, r.report.min_pairwise_distance);
        if (count > 1) {
            std::printf("clusters:\n");
            for (const auto& c : ms.clusters)
                std::printf("  action %.9f from %d seed(s)\n", c.action, c.count);
        }
        if (!out_path.empty() && ms.best.converged)
            std::printf("trajectory written to %s\n", out_path.c_str());
    }
    return ms.best.converged ? 0 : 1;
}

int run_averaging(std::vector<double> alphas, int truncation, int gamma_steps,
                  double tol, bool as_json) {
    if (alphas.empty()) alphas = {0.5, 1.0, 1.5};
    bool all_ok = true;
    json out = json::array();
    for (double alpha : alphas) {
        auto series = eval_Stilde_series(alpha, truncation);
        double ub = stilde_upper_bound(alpha);
        CircleSpec circle;
        circle.e1 = Eigen::Vector3d(1, 0, 0);
        circle.e2 = Eigen::Vector3d(0, 1, 0);
        circle.radius = 1.0;
        double quad =
            eval_Stilde_quadrature(Eigen::Vector3d(1, 0, 0), circle, alpha, tol);
        double gap = std::abs(series.value_series - quad);

        bool ok = series.value_series <= ub - 1e-9 && ub <= -1e-9 &&
                  gap <= std::max(1e-6, 1e-6 * std::abs(series.value_series));

        json ja;
        ja["alpha"] = alpha;
        ja["series"] = series.value_series;
        ja["truncation_bound"] = series.truncation_bound;
        ja["upper_bound"] = ub;
        ja["quadrature"] = quad;
        ja["gap"] = gap;

        if (gamma_steps > 0) {
            std::vector<double> gammas(gamma_steps);
            for (int g = 0; g < gamma_steps; ++g)
                gammas[g] = (pi / 2) * g / std::max(gamma_steps - 1.0, 1.0);
            auto prof = gamma_profile(alpha, gammas);
            for (size_t g = 1; g < prof.size(); ++g)
                ok = ok && prof[g] <= prof[g - 1] + 1e-9;
            for (size_t g = 0; g < prof.size(); ++g)
                ok = ok && prof[g] <= std::pow(std::cos(gammas[g]),
                                               1.0 - alpha / 2.0) *
                                              prof[0] +
                                          1e-9;
            ja["gamma_profile"] = prof;
        }
        ja["consistent"] = ok;
        out.push_back(ja);
        all_ok = all_ok && ok;

        if (!as_json) {
            std::printf("alpha %.3f: series %.9f (tail < %.1e), bound %.6f, "
                        "quadrature %.9f, gap %.1e -> %s\n",
                        alpha, series.value_series, series.truncation_bound, ub,
                        quad, gap, ok ? "ok" : "INCONSISTENT");
            if (gamma_steps > 0) {
                std::printf("  tilt profile:");
                for (double v : ja["gamma_profile"].get<std::vector<double>>())
                    std::printf(" %.4f", v);
                std::printf("\n");
            }
        }
    }
    if (as_json) std::printf("%s\n", out.dump(2).c_str());
    return all_ok ? 0 : 1;
}

int run_verify(const std::string& path, bool as_json) {
    VerifyOutcome out = verify_trajectory(path);
    if (as_json) {
        json j;
        j["pass"] = out.pass;
        j["equivariance"] = out.equivariance;
        j["centering"] = out.centering;
        j["report"] = report_to_json(out.report);
        j["failures"] = out.failures;
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::printf("action %.12g, newton %.3e, drift %.3e, equivariance %.3e, "
                    "min distance %.4f\n",
                    out.report.action, out.report.newton_residual,
                    out.report.energy_drift, out.equivariance,
                    out.report.min_pairwise_distance);
        for (const auto& f : out.failures)
            std::printf("FAIL: %s\n", f.c_str());
        std::printf("%s\n", out.pass ? "PASS" : "FAIL");
    }
    return out.pass ? 0 : 1;
}

int run_catalog_list(bool as_json) {
    if (as_json) {
        json out = json::array();
        for (const auto& e : catalog_entries()) {
            json je;
            je["name"] = e.name;
            je["description"] = e.description;
            je["default_params"] = e.default_params;
            out.push_back(je);
        }
        std::printf("%s\n", out.dump(2).c_str());
    } else {
        for (const auto& e : catalog_entries())
            std::printf("%-22s %s\n", e.name.c_str(), e.description.c_str());
    }
    return 0;
}

int run_catalog_show(const std::string& name, bool as_json) {
    const CatalogEntry& e = catalog_entry(name);
    GroupAction action = catalog_build(name);
    if (as_json) {
        json j;
        j["name"] = e.name;
        j["description"] = e.description;
        j["default_params"] = e.default_params;
        j["order"] = action.order();
        j["expected"] = {
            {"coercive", e.expected.coercive},
            {"action_type", to_string(e.expected.action_type)},
            {"rcp_maximal", e.expected.rcp_maximal},
            {"rcp_kertau", e.expected.rcp_kertau},
            {"theorem_applicable", e.expected.theorem_applicable},
            {"boundary_collisions_unresolved",
             e.expected.boundary_collisions_unresolved},
        };
        j["config"] = action_to_json(action);
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::printf("%s: %s\n", e.name.c_str(), e.description.c_str());
        std::printf("defaults:");
        for (const auto& [k, v] : e.default_params)
            std::printf(" %s=%g", k.c_str(), v);
        std::printf("\norder %d, expected type %s, coercive %s\n", action.order(),
                    to_string(e.expected.action_type).c_str(),
                    e.expected.coercive ? "yes" : "no");
        std::printf("rcp: maximal %s, ker tau %s, theorem %s%s\n",
                    e.expected.rcp_maximal ? "yes" : "no",
                    e.expected.rcp_kertau ? "yes" : "no",
                    e.expected.theorem_applicable ? "applicable" : "not applicable",
                    e.expected.boundary_collisions_unresolved
                        ? " (boundary collisions unresolved)"
                        : "");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"symmetric n-body loop analysis and minimization"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "machine readable output");
    auto add_json = [&as_json](CLI::App* sub) {
        sub->add_flag("--json", as_json, "machine readable output");
    };

    auto* cat = app.add_subcommand("catalog", "built-in group actions");
    cat->require_subcommand(1);
    auto* cat_list = cat->add_subcommand("list", "list catalog entries");
    auto* cat_show = cat->add_subcommand("show", "details for one entry");
    std::string show_name;
    cat_show->add_option("name", show_name, "catalog entry name")->required();

    std::string an_target;
    std::vector<std::string> an_params;
    auto* an = app.add_subcommand("analyze", "group-theoretic analysis of an action");
    an->add_option("target", an_target, "config file or catalog name")->required();
    an->add_option("--param", an_params, "override catalog parameter key=value");

    std::string mi_target, mi_out;
    std::vector<std::string> mi_params;
    int mi_samples = 256, mi_count = 1;
    std::uint64_t mi_seed = 1;
    double mi_tol = 1e-8;
    auto* mi = app.add_subcommand("minimize", "minimize the equivariant action");
    mi->add_option("target", mi_target, "config file or catalog name")->required();
    mi->add_option("--param", mi_params, "override catalog parameter key=value");
    mi->add_option("--samples", mi_samples, "time samples per period");
    mi->add_option("--seed", mi_seed, "base random seed");
    mi->add_option("--tol", mi_tol, "gradient tolerance");
    mi->add_option("--count", mi_count, "number of random seeds to try");
    mi->add_option("--out", mi_out, "write trajectory CSV (+ .json sidecar)");

    std::vector<double> av_alphas;
    int av_trunc = 100000, av_gamma = 0;
    double av_tol = 1e-9;
    auto* av = app.add_subcommand("averaging",
                                  "cross-check the circle averaging estimates");
    av->add_option("--alpha", av_alphas, "potential exponents to check");
    av->add_option("--truncation", av_trunc, "series truncation order");
    av->add_option("--gamma-steps", av_gamma, "tilt profile resolution (0 = skip)");
    av->add_option("--tol", av_tol, "quadrature tolerance");

    std::string ve_path;
    auto* ve = app.add_subcommand("verify", "verify a trajectory file");
    ve->add_option("trajectory", ve_path, "CSV written by minimize")->required();

    for (CLI::App* sub : {cat_list, cat_show, an, mi, av, ve}) add_json(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*cat_list) return run_catalog_list(as_json);
        if (*cat_show) return run_catalog_show(show_name, as_json);
        if (*an) {
            GroupAction action = load_target(an_target, parse_params(an_params));
            if (as_json)
                std::printf("%s\n", analysis_to_json(action).dump(2).c_str());
            else
                print_analysis(action);
            return 0;
        }
        if (*mi)
            return run_minimize(mi_target, parse_params(mi_params), mi_samples,
                                mi_seed, mi_tol, mi_count, mi_out, as_json);
        if (*av) return run_averaging(av_alphas, av_trunc, av_gamma, av_tol, as_json);
        if (*ve) return run_verify(ve_path, as_json);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 2;
    }
    return 2;
}
