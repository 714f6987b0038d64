#include "nbsym/loops.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace nbsym {

namespace {

constexpr double kCollisionThreshold = 1e-9;

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

// Plans are created once per (M, channels) shape and reused via the new-array
// execute interface. Planner access is serialized; execution is thread-safe.
PlanPair& plans_for(int M, int nd) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, PlanPair> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(M, nd);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<double> r(static_cast<size_t>(M) * nd);
    std::vector<std::complex<double>> c(static_cast<size_t>(M / 2 + 1) * nd);
    PlanPair p;
    int len[1] = {M};
    p.fwd = fftw_plan_many_dft_r2c(1, len, nd, r.data(), nullptr, nd, 1,
                                   reinterpret_cast<fftw_complex*>(c.data()),
                                   nullptr, nd, 1,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_many_dft_c2r(1, len, nd,
                                   reinterpret_cast<fftw_complex*>(c.data()),
                                   nullptr, nd, 1, r.data(), nullptr, nd, 1,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p.fwd || !p.bwd) throw std::runtime_error("fftw plan creation failed");
    return cache.emplace(key, p).first->second;
}

struct Spectrum {
    int M = 0;
    int nd = 0;
    std::vector<std::complex<double>> c; // (M/2+1) x nd, mode-major

    std::complex<double>& at(int m, int ch) {
        return c[static_cast<size_t>(m) * nd + ch];
    }
};

Spectrum forward(const Loop& loop) {
    Spectrum s;
    s.M = loop.M;
    s.nd = loop.n * loop.d;
    s.c.resize(static_cast<size_t>(loop.M / 2 + 1) * s.nd);
    std::vector<double> in(loop.x.data(), loop.x.data() + loop.size());
    PlanPair& p = plans_for(s.M, s.nd);
    fftw_execute_dft_r2c(p.fwd, in.data(),
                         reinterpret_cast<fftw_complex*>(s.c.data()));
    double scale = 1.0 / loop.M;
    for (auto& z : s.c) z *= scale;
    return s;
}

Loop inverse(Spectrum s, const Loop& proto) {
    Loop out = proto;
    std::vector<double> r(static_cast<size_t>(s.M) * s.nd);
    PlanPair& p = plans_for(s.M, s.nd);
    fftw_execute_dft_c2r(p.bwd, reinterpret_cast<fftw_complex*>(s.c.data()),
                         r.data());
    out.x = Eigen::Map<const Eigen::VectorXd>(r.data(),
                                              static_cast<long>(r.size()));
    return out;
}

// All spectral maps drop the unpaired Nyquist mode so that time shifts and
// reflections form an exact group action for every sample count.
void zero_nyquist(Spectrum& s) {
    if (s.M % 2 == 0)
        for (int ch = 0; ch < s.nd; ++ch) s.at(s.M / 2, ch) = 0.0;
}

void check_loop(const Loop& loop) {
    if (loop.n < 1 || loop.d < 1 || loop.M < 2)
        throw std::invalid_argument("loop: need n >= 1, d >= 1, M >= 2");
    if (loop.masses.size() != loop.n)
        throw std::invalid_argument("loop: masses size mismatch");
    if (loop.x.size() != loop.size())
        throw std::invalid_argument("loop: sample buffer size mismatch");
    if (!(loop.T > 0)) throw std::invalid_argument("loop: period must be positive");
}

void check_omega(const Loop& loop, const std::optional<Eigen::MatrixXd>& Omega) {
    if (!Omega) return;
    if (Omega->rows() != loop.d || Omega->cols() != loop.d)
        throw std::invalid_argument("rotating frame matrix must be d x d");
    if ((*Omega + Omega->transpose()).norm() > 1e-12)
        throw std::invalid_argument("rotating frame matrix must be skew-symmetric");
}

// velocity samples, optionally in the rotating frame (x' + Omega x)
Eigen::VectorXd velocity_samples(const Loop& loop,
                                 const std::optional<Eigen::MatrixXd>& Omega) {
    Loop v = derivative(loop, 1);
    if (Omega) {
        for (int j = 0; j < loop.M; ++j)
            for (int i = 0; i < loop.n; ++i) {
                Eigen::VectorXd w = (*Omega) * loop.body(j, i);
                for (int c = 0; c < loop.d; ++c) v.at(j, i, c) += w[c];
            }
    }
    return v.x;
}

} // namespace

Loop make_loop(int n, int d, int M, double T, const Eigen::VectorXd& masses) {
    Loop loop;
    loop.n = n;
    loop.d = d;
    loop.M = M;
    loop.T = T;
    loop.masses = masses;
    loop.x = Eigen::VectorXd::Zero(static_cast<long>(M) * n * d);
    check_loop(loop);
    return loop;
}

Loop make_loop(const GroupAction& action, int M) {
    return make_loop(action.n, action.d, M, action.period, action.masses);
}

Loop derivative(const Loop& loop, int order) {
    check_loop(loop);
    Spectrum s = forward(loop);
    const double w0 = 2.0 * std::numbers::pi / loop.T;
    for (int m = 0; m <= loop.M / 2; ++m) {
        std::complex<double> f = std::pow(std::complex<double>(0.0, m * w0), order);
        for (int ch = 0; ch < s.nd; ++ch) s.at(m, ch) *= f;
    }
    zero_nyquist(s);
    return inverse(std::move(s), loop);
}

Loop time_shift(const Loop& loop, double sh) {
    check_loop(loop);
    Spectrum s = forward(loop);
    const double w0 = 2.0 * std::numbers::pi / loop.T;
    for (int m = 0; m <= loop.M / 2; ++m) {
        std::complex<double> f = std::exp(std::complex<double>(0.0, m * w0 * sh));
        for (int ch = 0; ch < s.nd; ++ch) s.at(m, ch) *= f;
    }
    zero_nyquist(s);
    return inverse(std::move(s), loop);
}

Loop time_reflect(const Loop& loop, double c2) {
    check_loop(loop);
    Spectrum s = forward(loop);
    const double w0 = 2.0 * std::numbers::pi / loop.T;
    for (int m = 0; m <= loop.M / 2; ++m) {
        std::complex<double> f = std::exp(std::complex<double>(0.0, -m * w0 * c2));
        for (int ch = 0; ch < s.nd; ++ch) s.at(m, ch) = std::conj(s.at(m, ch)) * f;
    }
    zero_nyquist(s);
    return inverse(std::move(s), loop);
}

Loop resample(const Loop& loop, int M) {
    check_loop(loop);
    if (M < 2) throw std::invalid_argument("resample: M >= 2 required");
    Spectrum s = forward(loop);
    zero_nyquist(s);
    Loop proto = make_loop(loop.n, loop.d, M, loop.T, loop.masses);
    Spectrum t;
    t.M = M;
    t.nd = s.nd;
    t.c.assign(static_cast<size_t>(M / 2 + 1) * s.nd, 0.0);
    int keep = std::min(loop.M / 2, M / 2);
    for (int m = 0; m <= keep; ++m)
        for (int ch = 0; ch < s.nd; ++ch) t.at(m, ch) = s.at(m, ch);
    zero_nyquist(t);
    return inverse(std::move(t), proto);
}

Loop act(const GroupAction& action, int element, const Loop& loop) {
    check_loop(loop);
    if (loop.n != action.n || loop.d != action.d)
        throw std::invalid_argument("act: loop shape does not match the action");
    if (element < 0 || element >= action.order())
        throw std::invalid_argument("act: element index out of range");
    const GroupElement& g = action.elements[element];
    Loop timeop = g.tau.is_rotation()
        ? time_shift(loop, -g.tau.c.value() * loop.T)
        : time_reflect(loop, 2.0 * g.tau.c.value() * loop.T);
    Perm sinv = g.sigma.inverse();
    Loop out = loop;
    for (int j = 0; j < loop.M; ++j)
        for (int i = 0; i < loop.n; ++i) {
            Eigen::VectorXd b = g.rho * timeop.body(j, sinv(i));
            for (int c = 0; c < loop.d; ++c) out.at(j, i, c) = b[c];
        }
    return out;
}

void center_masses(Loop& loop) {
    check_loop(loop);
    double mtot = loop.masses.sum();
    for (int j = 0; j < loop.M; ++j) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(loop.d);
        for (int i = 0; i < loop.n; ++i) c += loop.masses[i] * loop.body(j, i);
        c /= mtot;
        for (int i = 0; i < loop.n; ++i)
            for (int k = 0; k < loop.d; ++k) loop.at(j, i, k) -= c[k];
    }
}

Loop project_equivariant(const Loop& loop, const GroupAction& action) {
    check_loop(loop);
    Loop avg = make_loop(loop.n, loop.d, loop.M, loop.T, loop.masses);
    for (int e = 0; e < action.order(); ++e) avg.x += act(action, e, loop).x;
    avg.x /= action.order();
    center_masses(avg);
    return avg;
}

double centering_residual(const Loop& loop) {
    check_loop(loop);
    double worst = 0.0;
    for (int j = 0; j < loop.M; ++j) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(loop.d);
        for (int i = 0; i < loop.n; ++i) c += loop.masses[i] * loop.body(j, i);
        worst = std::max(worst, c.norm());
    }
    return worst;
}

double equivariance_residual(const Loop& loop, const GroupAction& action) {
    check_loop(loop);
    double worst = 0.0;
    for (int e = 1; e < action.order(); ++e) {
        Loop g = act(action, e, loop);
        worst = std::max(worst, (g.x - loop.x).cwiseAbs().maxCoeff());
    }
    return worst;
}

double min_pairwise_distance(const Loop& loop) {
    check_loop(loop);
    if (loop.n < 2) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < loop.M; ++j)
        for (int i = 0; i < loop.n; ++i)
            for (int l = i + 1; l < loop.n; ++l)
                best = std::min(best, (loop.body(j, i) - loop.body(j, l)).norm());
    return best;
}

double loop_sup_distance(const Loop& a, const Loop& b) {
    if (a.x.size() != b.x.size())
        throw std::invalid_argument("loop_sup_distance: shape mismatch");
    return (a.x - b.x).cwiseAbs().maxCoeff();
}

double l2_inner(const Loop& a, const Loop& b) {
    if (a.x.size() != b.x.size() || a.n != b.n)
        throw std::invalid_argument("l2_inner: shape mismatch");
    double acc = 0.0;
    for (int j = 0; j < a.M; ++j)
        for (int i = 0; i < a.n; ++i)
            acc += a.masses[i] * a.body(j, i).dot(b.body(j, i));
    return acc * a.T / a.M;
}

double l2_norm(const Loop& a) { return std::sqrt(std::max(0.0, l2_inner(a, a))); }

double h1_inner(const Loop& a, const Loop& b) {
    Loop da = derivative(a, 1), db = derivative(b, 1);
    double w = 2.0 * std::numbers::pi / a.T;
    return l2_inner(da, db) + w * w * l2_inner(a, b);
}

double kinetic_integral(const Loop& loop,
                        const std::optional<Eigen::MatrixXd>& Omega) {
    check_loop(loop);
    check_omega(loop, Omega);
    Eigen::VectorXd v = velocity_samples(loop, Omega);
    double acc = 0.0;
    for (int j = 0; j < loop.M; ++j)
        for (int i = 0; i < loop.n; ++i) {
            double s = 0.0;
            for (int c = 0; c < loop.d; ++c) {
                double vc = v[(static_cast<long>(j) * loop.n + i) * loop.d + c];
                s += vc * vc;
            }
            acc += 0.5 * loop.masses[i] * s;
        }
    return acc * loop.T / loop.M;
}

double potential_integral(const Loop& loop, double alpha, double eps) {
    check_loop(loop);
    double acc = 0.0;
    for (int j = 0; j < loop.M; ++j)
        for (int i = 0; i < loop.n; ++i)
            for (int l = i + 1; l < loop.n; ++l) {
                double r2 = (loop.body(j, i) - loop.body(j, l)).squaredNorm();
                if (eps == 0.0 && r2 < kCollisionThreshold * kCollisionThreshold)
                    return std::numeric_limits<double>::infinity();
                acc += loop.masses[i] * loop.masses[l] *
                       std::pow(r2 + eps * eps, -alpha / 2.0);
            }
    return acc * loop.T / loop.M;
}

double action_value(const Loop& loop, double alpha,
                    const std::optional<Eigen::MatrixXd>& Omega, double eps) {
    double U = potential_integral(loop, alpha, eps);
    if (!std::isfinite(U)) return U;
    return kinetic_integral(loop, Omega) + U;
}

Eigen::VectorXd action_gradient(const Loop& loop, double alpha,
                                const std::optional<Eigen::MatrixXd>& Omega,
                                double eps) {
    check_loop(loop);
    check_omega(loop, Omega);
    const double h = loop.T / loop.M;
    Loop acc = derivative(loop, 2);
    Eigen::VectorXd grad(loop.size());
    for (int j = 0; j < loop.M; ++j) {
        for (int i = 0; i < loop.n; ++i) {
            Eigen::VectorXd gi = -loop.masses[i] * acc.body(j, i);
            for (int l = 0; l < loop.n; ++l) {
                if (l == i) continue;
                Eigen::VectorXd diff = loop.body(j, i) - loop.body(j, l);
                double r2 = diff.squaredNorm() + eps * eps;
                gi -= alpha * loop.masses[i] * loop.masses[l] *
                      std::pow(r2, -alpha / 2.0 - 1.0) * diff;
            }
            for (int c = 0; c < loop.d; ++c)
                grad[(static_cast<long>(j) * loop.n + i) * loop.d + c] = h * gi[c];
        }
    }
    if (Omega) {
        // extra rotating-frame terms: -2 m Omega x' - m Omega^2 x
        Loop vel = derivative(loop, 1);
        const Eigen::MatrixXd O2 = (*Omega) * (*Omega);
        for (int j = 0; j < loop.M; ++j)
            for (int i = 0; i < loop.n; ++i) {
                Eigen::VectorXd extra =
                    -2.0 * (*Omega) * vel.body(j, i) - O2 * loop.body(j, i);
                extra *= loop.masses[i];
                for (int c = 0; c < loop.d; ++c)
                    grad[(static_cast<long>(j) * loop.n + i) * loop.d + c] +=
                        h * extra[c];
            }
    }
    return grad;
}

double newton_residual(const Loop& loop, double alpha) {
    check_loop(loop);
    Loop acc = derivative(loop, 2);
    double num = 0.0, den = 0.0;
    for (int j = 0; j < loop.M; ++j)
        for (int i = 0; i < loop.n; ++i) {
            Eigen::VectorXd force = Eigen::VectorXd::Zero(loop.d);
            for (int l = 0; l < loop.n; ++l) {
                if (l == i) continue;
                Eigen::VectorXd diff = loop.body(j, i) - loop.body(j, l);
                double r2 = diff.squaredNorm();
                force -= alpha * loop.masses[i] * loop.masses[l] *
                         std::pow(r2, -alpha / 2.0 - 1.0) * diff;
            }
            num += (loop.masses[i] * acc.body(j, i) - force).squaredNorm();
            den += force.squaredNorm();
        }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

EnergySeries energy_series(const Loop& loop, double alpha) {
    check_loop(loop);
    EnergySeries out;
    out.kinetic.resize(loop.M);
    out.potential.resize(loop.M);
    out.energy.resize(loop.M);
    Loop vel = derivative(loop, 1);
    for (int j = 0; j < loop.M; ++j) {
        double K = 0.0;
        for (int i = 0; i < loop.n; ++i)
            K += 0.5 * loop.masses[i] * vel.body(j, i).squaredNorm();
        double U = 0.0;
        for (int i = 0; i < loop.n; ++i)
            for (int l = i + 1; l < loop.n; ++l)
                U += loop.masses[i] * loop.masses[l] *
                     std::pow((loop.body(j, i) - loop.body(j, l)).norm(), -alpha);
        out.kinetic[j] = K;
        out.potential[j] = U;
        out.energy[j] = K - U;
    }
    double mean = out.energy.mean();
    double spread = out.energy.maxCoeff() - out.energy.minCoeff();
    out.drift = spread / std::max(std::abs(mean), 1e-30);
    return out;
}

PartialQuantities partial_quantities(const Loop& loop, double alpha,
                                     const std::vector<int>& cluster) {
    check_loop(loop);
    if (cluster.empty()) throw std::invalid_argument("cluster must be nonempty");
    std::vector<bool> in(loop.n, false);
    for (int i : cluster) {
        if (i < 0 || i >= loop.n)
            throw std::invalid_argument("cluster index out of range");
        if (in[i]) throw std::invalid_argument("cluster index repeated");
        in[i] = true;
    }
    PartialQuantities out;
    out.kinetic.resize(loop.M);
    out.potential.resize(loop.M);
    out.energy.resize(loop.M);
    out.inertia.resize(loop.M);
    out.cross.resize(loop.M);
    Loop vel = derivative(loop, 1);
    double mk = 0.0;
    for (int i : cluster) mk += loop.masses[i];
    for (int j = 0; j < loop.M; ++j) {
        double K = 0.0;
        for (int i : cluster)
            K += 0.5 * loop.masses[i] * vel.body(j, i).squaredNorm();
        double Uin = 0.0, Ucross = 0.0;
        for (int i = 0; i < loop.n; ++i)
            for (int l = i + 1; l < loop.n; ++l) {
                double u = loop.masses[i] * loop.masses[l] *
                           std::pow((loop.body(j, i) - loop.body(j, l)).norm(),
                                    -alpha);
                if (in[i] && in[l]) Uin += u;
                else if (in[i] != in[l]) Ucross += u;
            }
        Eigen::VectorXd com = Eigen::VectorXd::Zero(loop.d);
        for (int i : cluster) com += loop.masses[i] * loop.body(j, i);
        com /= mk;
        double I = 0.0;
        for (int i : cluster)
            I += loop.masses[i] * (loop.body(j, i) - com).squaredNorm();
        out.kinetic[j] = K;
        out.potential[j] = Uin;
        out.energy[j] = K - Uin;
        out.inertia[j] = I;
        out.cross[j] = Ucross;
    }
    return out;
}

ActionReport action_report(const Loop& loop, double alpha) {
    ActionReport rep;
    rep.kinetic_integral = kinetic_integral(loop);
    rep.potential_integral = potential_integral(loop, alpha);
    rep.action = rep.kinetic_integral + rep.potential_integral;
    rep.min_pairwise_distance = min_pairwise_distance(loop);
    rep.newton_residual = newton_residual(loop, alpha);
    rep.energy_drift = energy_series(loop, alpha).drift;
    return rep;
}

Eigen::VectorXd h1_precondition(const Loop& shape, const Eigen::VectorXd& g) {
    check_loop(shape);
    if (g.size() != shape.size())
        throw std::invalid_argument("preconditioner: vector size mismatch");
    Loop tmp = shape;
    tmp.x = g;
    Spectrum s = forward(tmp);
    const double w0 = 2.0 * std::numbers::pi / shape.T;
    for (int m = 0; m <= shape.M / 2; ++m) {
        const double w = m * w0;
        const double lam = w * w + w0 * w0;
        for (int ch = 0; ch < s.nd; ++ch)
            s.at(m, ch) /= lam * shape.masses[ch / shape.d];
    }
    zero_nyquist(s);
    return inverse(std::move(s), tmp).x;
}

} // namespace nbsym
