#include "nbsym/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nbsym/symmetry.hpp"

namespace nbsym {

namespace {

std::string frac(const Rational& r) {
    if (r.den == 1) return std::to_string(r.num);
    return std::to_string(r.num) + "/" + std::to_string(r.den);
}

TimeTransform tau_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw std::invalid_argument("tau must be {kind, num, den}");
    const std::string kind = j.at("kind").get<std::string>();
    const std::int64_t num = j.value("num", std::int64_t{0});
    const std::int64_t den = j.value("den", std::int64_t{1});
    const Rational c(num, den);
    if (kind == "rotation") return TimeTransform::rotation(c);
    if (kind == "reflection") return TimeTransform::reflection(c);
    throw std::invalid_argument("tau kind must be rotation or reflection");
}

nlohmann::json tau_to_json(const TimeTransform& t) {
    nlohmann::json j;
    j["kind"] = t.kind == TimeTransform::Kind::rotation ? "rotation" : "reflection";
    j["num"] = t.c.num;
    j["den"] = t.c.den;
    return j;
}

Eigen::MatrixXd rho_from_json(const nlohmann::json& j, int d) {
    if (!j.is_array() || static_cast<int>(j.size()) != d)
        throw std::invalid_argument("rho must be a d x d row array");
    Eigen::MatrixXd R(d, d);
    for (int r = 0; r < d; ++r) {
        const auto& row = j.at(r);
        if (!row.is_array() || static_cast<int>(row.size()) != d)
            throw std::invalid_argument("rho must be a d x d row array");
        for (int c = 0; c < d; ++c) R(r, c) = row.at(c).get<double>();
    }
    return R;
}

} // namespace

GroupAction action_from_json(const nlohmann::json& j) {
    for (const char* key : {"n", "d", "alpha", "period", "masses", "generators"})
        if (!j.contains(key))
            throw std::invalid_argument(std::string("config missing field ") + key);
    const int n = j.at("n").get<int>();
    const int d = j.at("d").get<int>();
    const double alpha = j.at("alpha").get<double>();
    const double period = j.at("period").get<double>();
    const auto& jm = j.at("masses");
    if (!jm.is_array() || static_cast<int>(jm.size()) != n)
        throw std::invalid_argument("masses must be an array of length n");
    Eigen::VectorXd masses(n);
    for (int i = 0; i < n; ++i) masses[i] = jm.at(i).get<double>();

    std::vector<GroupElement> gens;
    for (const auto& jg : j.at("generators")) {
        GroupElement g;
        g.tau = tau_from_json(jg.at("tau"));
        g.rho = rho_from_json(jg.at("rho"), d);
        g.sigma = Perm::from_cycles(jg.at("sigma").get<std::string>(), n);
        gens.push_back(std::move(g));
    }
    return close_group(gens, n, d, alpha, period, masses);
}

GroupAction load_action(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return action_from_json(j);
}

nlohmann::json action_to_json(const GroupAction& action) {
    nlohmann::json j;
    j["n"] = action.n;
    j["d"] = action.d;
    j["alpha"] = action.alpha;
    j["period"] = action.period;
    j["masses"] = std::vector<double>(action.masses.data(),
                                      action.masses.data() + action.n);
    nlohmann::json gens = nlohmann::json::array();
    for (size_t e = 1; e < action.elements.size(); ++e) {
        const GroupElement& g = action.elements[e];
        nlohmann::json jg;
        jg["tau"] = tau_to_json(g.tau);
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < action.d; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < action.d; ++c) row.push_back(g.rho(r, c));
            rows.push_back(row);
        }
        jg["rho"] = rows;
        jg["sigma"] = g.sigma.to_cycles();
        gens.push_back(jg);
    }
    j["generators"] = gens;
    return j;
}

std::uint64_t config_hash(const nlohmann::json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

nlohmann::json report_to_json(const ActionReport& report) {
    nlohmann::json j;
    j["action"] = report.action;
    j["kinetic"] = report.kinetic_integral;
    j["potential"] = report.potential_integral;
    j["min_pairwise_distance"] = report.min_pairwise_distance;
    j["newton_residual"] = report.newton_residual;
    j["energy_drift"] = report.energy_drift;
    return j;
}

nlohmann::json analysis_to_json(const GroupAction& action) {
    nlohmann::json j;
    j["order"] = action.order();
    j["n"] = action.n;
    j["d"] = action.d;
    j["alpha"] = action.alpha;
    j["period"] = action.period;

    auto rep = rotating_circle_property(action);
    j["coercive"] = rep.coercive;
    j["action_type"] = to_string(rep.classification.type);
    j["isotropy_count"] = rep.classification.l;

    auto fd = fundamental_domain(action);
    j["fundamental_domain"] = {frac(fd.start), frac(fd.end)};
    j["boundary_isotropy_orders"] = {fd.H0.order(), fd.H1.order()};

    auto red = reducibility_check(action);
    j["kernel_intersection_trivial"] = red.kernel_intersection_trivial;
    j["subspace_trigger"] = red.subspace_trigger;
    j["period_trigger"] = red.period_trigger;

    j["collision_bound"] = to_string(bound_to_collisions_check(action));

    nlohmann::json iso = nlohmann::json::array();
    for (const auto& e : rep.isotropy) {
        nlohmann::json je;
        je["time"] = frac(e.time);
        je["order"] = e.subgroup.size();
        je["maximal"] = e.maximal;
        je["movable"] = e.movable;
        je["acts_trivially"] = e.acts_trivially;
        je["rcp"] = e.rcp;
        iso.push_back(je);
    }
    j["isotropy"] = iso;
    j["rcp_maximal"] = rep.rcp_maximal;
    j["rcp_kertau"] = rep.rcp_kertau;
    j["theorem_applicable"] = rep.theorem_applicable;
    return j;
}

void write_trajectory(const std::string& csv_path, const Loop& loop,
                      const GroupAction& action, const ActionReport& report) {
    if (loop.n != action.n || loop.d != action.d)
        throw std::invalid_argument("loop does not match the action");
    std::FILE* f = std::fopen(csv_path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open output file: " + csv_path);
    std::fprintf(f, "t");
    for (int i = 1; i <= loop.n; ++i)
        for (int c = 1; c <= loop.d; ++c) std::fprintf(f, ",x%d_%d", i, c);
    std::fprintf(f, "\n");
    for (int j = 0; j < loop.M; ++j) {
        std::fprintf(f, "%.17g", loop.T * j / loop.M);
        for (int i = 0; i < loop.n; ++i)
            for (int c = 0; c < loop.d; ++c)
                std::fprintf(f, ",%.17g", loop.at(j, i, c));
        std::fprintf(f, "\n");
    }
    std::fclose(f);

    nlohmann::json side;
    const nlohmann::json jaction = action_to_json(action);
    side["action"] = jaction;
    side["config_hash"] = config_hash(jaction);
    side["alpha"] = action.alpha;
    side["period"] = loop.T;
    side["samples"] = loop.M;
    side["n"] = loop.n;
    side["d"] = loop.d;
    side["masses"] = std::vector<double>(loop.masses.data(),
                                         loop.masses.data() + loop.n);
    side["report"] = report_to_json(report);
    std::ofstream out(csv_path + ".json");
    if (!out) throw std::runtime_error("cannot open sidecar for " + csv_path);
    out << side.dump(2) << "\n";
}

TrajectoryFile read_trajectory(const std::string& csv_path) {
    std::ifstream side_in(csv_path + ".json");
    if (!side_in)
        throw std::runtime_error("missing sidecar file: " + csv_path + ".json");
    nlohmann::json side;
    side_in >> side;
    for (const char* key : {"n", "d", "period", "masses", "samples"})
        if (!side.contains(key))
            throw std::runtime_error(std::string("sidecar missing field ") + key);
    const int n = side.at("n").get<int>();
    const int d = side.at("d").get<int>();
    const int M = side.at("samples").get<int>();
    Eigen::VectorXd masses(n);
    for (int i = 0; i < n; ++i) masses[i] = side.at("masses").at(i).get<double>();

    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open trajectory file: " + csv_path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty trajectory file: " + csv_path);

    Loop loop = make_loop(n, d, M, side.at("period").get<double>(), masses);
    int j = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (j >= M) throw std::runtime_error("trajectory has more rows than metadata samples");
        std::stringstream ss(line);
        std::string cell;
        if (!std::getline(ss, cell, ','))
            throw std::runtime_error("malformed trajectory row");
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < d; ++c) {
                if (!std::getline(ss, cell, ','))
                    throw std::runtime_error("trajectory row too short");
                loop.at(j, i, c) = std::stod(cell);
            }
        ++j;
    }
    if (j != M) throw std::runtime_error("trajectory row count does not match metadata");
    return TrajectoryFile{std::move(loop), std::move(side)};
}

VerifyOutcome verify_trajectory(const std::string& csv_path) {
    TrajectoryFile tf = read_trajectory(csv_path);
    if (!tf.sidecar.contains("action"))
        throw std::runtime_error("sidecar missing the action description");
    const GroupAction action = action_from_json(tf.sidecar.at("action"));
    if (action.n != tf.loop.n || action.d != tf.loop.d)
        throw std::runtime_error("sidecar action does not match the trajectory shape");

    VerifyOutcome out;
    out.report = action_report(tf.loop, action.alpha);
    out.equivariance = equivariance_residual(tf.loop, action);
    out.centering = centering_residual(tf.loop);

    auto expect = [&](bool ok, const std::string& label) {
        if (!ok) out.failures.push_back(label);
    };
    expect(out.centering <= 1e-8, "center of mass drifts beyond 1e-8");
    expect(out.equivariance <= 1e-8, "equivariance residual above 1e-8");
    expect(out.report.newton_residual <= 1e-6, "newton residual above 1e-6");
    expect(out.report.energy_drift <= 1e-6, "energy drift above 1e-6");
    expect(out.report.min_pairwise_distance >= 0.01,
           "minimum pairwise distance below 0.01");
    out.pass = out.failures.empty();
    return out;
}

} // namespace nbsym
