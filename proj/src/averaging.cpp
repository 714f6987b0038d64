#include "nbsym/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "nbsym/group.hpp"
#include "nbsym/quadrature.hpp"

namespace nbsym {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("alpha must lie in (0, 2)");
}

// Gegenbauer polynomials C_k^{lambda}(c) by the three-term recurrence.
// (1 - 2 c y + y^2)^{-lambda} = sum_k C_k^{lambda}(c) y^k.
std::vector<double> gegenbauer(double lambda, double c, int kmax) {
    std::vector<double> C(static_cast<size_t>(kmax) + 1);
    C[0] = 1.0;
    if (kmax >= 1) C[1] = 2.0 * lambda * c;
    for (int k = 2; k <= kmax; ++k)
        C[k] = (2.0 * (k + lambda - 1.0) * c * C[k - 1] -
                (k + 2.0 * lambda - 2.0) * C[k - 2]) / k;
    return C;
}

} // namespace

double eval_S_quadrature(const Eigen::VectorXd& xi, const Eigen::VectorXd& delta,
                         double alpha) {
    check_alpha(alpha);
    if (xi.size() != delta.size())
        throw std::invalid_argument("xi and delta must have equal dimension");
    const double nxi = xi.norm();
    const double nd = delta.norm();
    if (nxi == 0.0) throw std::invalid_argument("xi must be nonzero");
    if (nd == 0.0) return 0.0;

    // Substitute t = u^{(2+alpha)/2}; the integrand becomes
    // (2+alpha)/2 * u^{alpha/2} [ |u xi + delta|^-alpha - u^-alpha |xi|^-alpha ].
    const double u_min = std::max(0.0, -xi.dot(delta) / (nxi * nxi));
    const double d_min = (u_min * xi + delta).norm();
    if (d_min < 1e-3 * nd) {
        if (alpha >= 1.0)
            throw std::domain_error("ray passes too close to a collision; "
                                    "integral diverges for alpha >= 1");
        std::fprintf(stderr, "eval_S_quadrature: near-collision ray "
                             "(min distance %.3e), accuracy degraded\n", d_min);
    }

    const double half = alpha / 2.0;
    const double U0 = std::max(std::pow(8.0, 2.0 / (2.0 + alpha)), 4.0 * nd / nxi);

    auto f1 = [&](double u) {
        return std::pow(u, half) * std::pow((u * xi + delta).norm(), -alpha);
    };
    std::vector<double> cuts = {0.0, U0};
    if (1.0 < U0) cuts.push_back(1.0);
    if (u_min > 0.0 && u_min < U0) cuts.push_back(u_min);
    std::sort(cuts.begin(), cuts.end());
    double I1 = 0.0;
    for (size_t j = 0; j + 1 < cuts.size(); ++j)
        I1 += integrate(f1, cuts[j], cuts[j + 1], 1e-12, 1e-11).value;

    const double I2 = std::pow(nxi, -alpha) * std::pow(U0, 1.0 - half) / (1.0 - half);

    // Tail over [U0, inf): expand |u xi + delta|^-alpha in powers of |delta|/(u|xi|)
    // with Gegenbauer coefficients; k = 0 cancels against the subtracted term.
    const double chat = xi.dot(delta) / (nxi * nd);
    const int kmax = 80;
    const auto C = gegenbauer(half, -chat, kmax);
    const double ratio = nd / nxi;
    double tail = 0.0;
    double rk = 1.0;
    for (int k = 1; k <= kmax; ++k) {
        rk *= ratio;
        tail += C[k] * rk * std::pow(U0, 1.0 - half - k) / (k + half - 1.0);
    }
    tail *= std::pow(nxi, -alpha);

    return 0.5 * (2.0 + alpha) * (I1 - I2 + tail);
}

double stilde_upper_bound(double alpha) {
    check_alpha(alpha);
    return -(alpha / 4.0) * (8.0 - 2.0 * alpha + alpha * alpha) / (2.0 - alpha) +
           0.5 * (2.0 + alpha) * alpha * alpha * ((3.0 - alpha) / (2.0 - alpha)) *
               std::pow(2.0, -alpha);
}

double stilde_truncation_bound(double alpha, int K) {
    check_alpha(alpha);
    if (K < 1) throw std::invalid_argument("K must be positive");
    // term_k < (alpha^2/4) 2^{3-alpha} k^{alpha-3}; integrate the tail.
    return (2.0 + alpha) / 4.0 * (alpha * alpha / 4.0) *
           std::pow(2.0, 3.0 - alpha) * std::pow(double(K), alpha - 2.0) /
           (2.0 - alpha);
}

AveragingResult eval_Stilde_series(double alpha, int K) {
    check_alpha(alpha);
    if (K < 8) throw std::invalid_argument("K too small");

    // Partial sums of the defining series at geometric checkpoints, then
    // Richardson elimination of the K^{alpha-2-j} tail terms.
    const int K0 = 2048;
    int J = 1;
    while (J < 7 && K0 * (1 << J) <= K) ++J;
    std::vector<double> S;
    S.reserve(J);

    double sum = 0.0;
    double b = 1.0;  // binom(-alpha/2, k)
    int k = 1;
    int used = 0;
    const double beta = (2.0 + alpha) / 4.0;
    for (int j = 0; j < J; ++j) {
        const int Kj = K0 * (1 << j);
        for (; k <= Kj; ++k) {
            b *= (-alpha / 2.0 - k + 1.0) / k;
            const double t = (alpha / 2.0 + k) / (1.0 + k);
            const double term = b * b * (1.0 / (k + beta)) * (t * t + 1.0);
            sum += term;
            used = k;
            if (term < 1e-12 && k > 64) { k = Kj + 1; break; }
        }
        S.push_back(sum);
    }

    for (int m = 0; m < J - 1; ++m) {
        const double f = std::pow(2.0, (2.0 - alpha) + m);
        for (int i = 0; i + 1 < J - m; ++i)
            S[i] = (f * S[i + 1] - S[i]) / (f - 1.0);
    }

    AveragingResult out;
    out.value_series = alpha * alpha / 4.0 + 1.0 + (2.0 + alpha) / 4.0 * S[0] -
                       (2.0 + alpha) / (2.0 - alpha);
    out.truncation_bound = stilde_truncation_bound(alpha, used);
    out.truncation_order = used;
    return out;
}

double fourier_average(double x, double alpha) {
    check_alpha(alpha);
    if (x < 0.0) throw std::invalid_argument("x must be nonnegative");
    if (x == 0.0) return 1.0;
    if (x > 1.0) return std::pow(x, -alpha) * fourier_average(1.0 / x, alpha);
    if (x == 1.0 && alpha >= 1.0)
        throw std::domain_error("average diverges at x = 1 for alpha >= 1");

    double sum = 1.0;
    double b = 1.0;
    double xp = 1.0;
    const double x2 = x * x;
    for (int k = 1; k <= 20000000; ++k) {
        b *= (-alpha / 2.0 - k + 1.0) / k;
        xp *= x2;
        const double term = b * b * xp;
        sum += term;
        if (term < 1e-16 * sum && k > 8) break;
    }
    return sum;
}

namespace {

// Angular average of (d^2 + 4 x sin^2 psi)^{-alpha/2} over psi in [0, pi/2],
// times 2/pi, where d = |1 - x|.  This equals the circle average of
// |x e^{i theta} + 1|^{-alpha}.  The inner substitution psi = d sinh(s)/(2 sqrt x)
// resolves the near-singular peak at psi = 0 when d is small.
double ang_avg(double x, double d, double alpha) {
    const double sx = std::sqrt(x);
    const double split = 0.7;
    double I1;
    if (d == 0.0) throw std::domain_error("angular average singular at x = 1");
    const double smax = std::asinh(2.0 * sx * split / d);
    auto f_near = [&](double s) {
        const double ch = std::cosh(s);
        const double psi = d * std::sinh(s) / (2.0 * sx);
        const double sp = std::sin(psi);
        const double num = d * d + 4.0 * x * sp * sp;
        const double den = d * d + 4.0 * x * psi * psi;
        const double corr = std::pow(num / den, -alpha / 2.0);
        return std::pow(ch, 1.0 - alpha) * corr;
    };
    I1 = integrate(f_near, 0.0, smax, 1e-13, 1e-11).value *
         std::pow(d, 1.0 - alpha) / (2.0 * sx);
    auto f_far = [&](double psi) {
        const double sp = std::sin(psi);
        return std::pow(d * d + 4.0 * x * sp * sp, -alpha / 2.0);
    };
    const double I2 = integrate(f_far, split, kPi / 2.0, 1e-13, 1e-11).value;
    return (2.0 / kPi) * (I1 + I2);
}

// g(t) = circle average of |t^{2/(2+alpha)} + e^{i theta}|^{-alpha} minus
// t^{-2alpha/(2+alpha)}, for t away from 1.  Stable for large and small t.
double g_far(double t, double alpha) {
    const double x = std::pow(t, 2.0 / (2.0 + alpha));
    auto f = [&](double th) {
        return std::expm1(-(alpha / 2.0) *
                          std::log1p((2.0 * std::cos(th) + 1.0 / x) / x));
    };
    const double I = integrate(f, 0.0, kPi, 1e-13, 1e-11).value;
    return std::pow(x, -alpha) * I / kPi;
}

// g(1 - dt) evaluated stably for small |dt| (dt may be negative for t > 1).
double g_near(double dt, double alpha) {
    const double l = std::log1p(-dt);
    const double q = 2.0 / (2.0 + alpha);
    const double d = -std::expm1(q * l);
    const double x = 1.0 - d;
    return ang_avg(x, std::abs(d), alpha) - std::exp(-alpha * q * l);
}

// In-plane unit circle average: Stilde for |xi| = 1 lying in the circle plane,
// radius 1.  Independent of the series route; the order of integration is
// swapped (angular average first) so the near-collision direction integrates
// exactly instead of being sampled.
double stilde_inplane(double alpha) {
    const double p = 6.0 / (2.0 - alpha);

    auto I0f = [&](double y) { return g_far(y * y * y, alpha) * 3.0 * y * y; };
    const double I0 = integrate(I0f, 0.0, std::cbrt(0.5), 1e-11, 1e-10).value;

    auto IAf = [&](double s) {
        return g_near(std::pow(s, p), alpha) * p * std::pow(s, p - 1.0);
    };
    const double IA =
        integrate(IAf, 0.0, std::pow(0.5, 1.0 / p), 1e-11, 1e-10).value;

    auto IBf = [&](double s) {
        return g_near(-std::pow(s, p), alpha) * p * std::pow(s, p - 1.0);
    };
    const double IB = integrate(IBf, 0.0, 1.0, 1e-11, 1e-10).value;

    auto I2f = [&](double t) { return g_far(t, alpha); };
    const double I2 = integrate(I2f, 2.0, 60.0, 1e-12, 1e-11).value;

    auto I3f = [&](double v) { return g_far(1.0 / v, alpha) / (v * v); };
    const double I3 = integrate(I3f, 1e-14, 1.0 / 60.0, 1e-12, 1e-11).value;

    return I0 + IA + IB + I2 + I3;
}

// Circle average for unit xi at angle gamma out of the circle plane, unit
// radius, by midpoint trapezoid on the half circle with doubling refinement.
double stilde_tilted(double gamma, double alpha, double tol, int* samples_out) {
    Eigen::Vector3d xi(std::cos(gamma), 0.0, std::sin(gamma));
    auto value_at = [&](int N) {
        double acc = 0.0;
        for (int j = 0; j < N; ++j) {
            const double th = kPi * (j + 0.5) / N;
            Eigen::Vector3d delta(std::cos(th), std::sin(th), 0.0);
            acc += eval_S_quadrature(xi, delta, alpha);
        }
        return acc / N;
    };
    int N = 64;
    double prev = value_at(N);
    while (N <= 4096) {
        N *= 2;
        const double cur = value_at(N);
        if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) {
            if (samples_out) *samples_out = N;
            return cur;
        }
        prev = cur;
    }
    if (samples_out) *samples_out = N;
    std::fprintf(stderr, "eval_Stilde_quadrature: circle average did not reach "
                         "tolerance at N = %d\n", N);
    return prev;
}

} // namespace

double eval_Stilde_quadrature(const Eigen::VectorXd& xi, const CircleSpec& circle,
                              double alpha, double tol) {
    check_alpha(alpha);
    if (circle.e1.size() != xi.size() || circle.e2.size() != xi.size())
        throw std::invalid_argument("circle plane dimension mismatch");
    if (std::abs(circle.e1.norm() - 1.0) > 1e-9 ||
        std::abs(circle.e2.norm() - 1.0) > 1e-9 ||
        std::abs(circle.e1.dot(circle.e2)) > 1e-9)
        throw std::invalid_argument("circle axes must be orthonormal");
    if (!(circle.radius > 0.0))
        throw std::invalid_argument("circle radius must be positive");
    const double nxi = xi.norm();
    if (nxi == 0.0) throw std::invalid_argument("xi must be nonzero");

    // S is rotation invariant, so the average depends only on |xi|, the radius
    // and the tilt angle between xi and the circle plane.
    const double a = xi.dot(circle.e1);
    const double b = xi.dot(circle.e2);
    const double cosg = std::min(1.0, std::hypot(a, b) / nxi);
    const double gamma = std::acos(std::min(1.0, std::max(-1.0, cosg)));

    const double scale = std::pow(nxi, -1.0 - alpha / 2.0) *
                         std::pow(circle.radius, 1.0 - alpha / 2.0);
    if (gamma < 1e-9) return scale * stilde_inplane(alpha);
    return scale * stilde_tilted(gamma, alpha, tol, nullptr);
}

std::vector<double> gamma_profile(double alpha, const std::vector<double>& gammas) {
    check_alpha(alpha);
    std::vector<double> out;
    out.reserve(gammas.size());
    for (double g : gammas) {
        if (g < 0.0 || g > kPi / 2.0 + 1e-12)
            throw std::invalid_argument("gamma must lie in [0, pi/2]");
        if (g < 1e-9)
            out.push_back(stilde_inplane(alpha));
        else
            out.push_back(stilde_tilted(g, alpha, 1e-9, nullptr));
    }
    return out;
}

Eigen::VectorXd standard_variation(const Eigen::VectorXd& delta, double T,
                                   double t) {
    const double nd = delta.norm();
    if (nd >= T)
        throw std::invalid_argument("standard variation requires |delta| < T");
    if (t < 0.0) throw std::invalid_argument("t must be nonnegative");
    if (t >= T) return Eigen::VectorXd::Zero(delta.size());
    if (t <= T - nd) return delta;
    return (T - t) / nd * delta;
}

double parabolic_kappa(const Eigen::MatrixXd& s, const Eigen::VectorXd& masses,
                       double alpha) {
    check_alpha(alpha);
    const int n = static_cast<int>(s.rows());
    if (masses.size() != n) throw std::invalid_argument("masses size mismatch");
    double U = 0.0, I = 0.0;
    for (int i = 0; i < n; ++i) {
        I += masses[i] * s.row(i).squaredNorm();
        for (int j = i + 1; j < n; ++j) {
            const double r = (s.row(i) - s.row(j)).norm();
            if (r <= 0.0) throw std::invalid_argument("coincident bodies");
            U += masses[i] * masses[j] * std::pow(r, -alpha);
        }
    }
    return (2.0 + alpha) * std::sqrt(U / (2.0 * I));
}

EjectionFixture equilateral_fixture(double alpha) {
    check_alpha(alpha);
    EjectionFixture fx;
    fx.alpha = alpha;
    fx.kappa = 1.0;
    fx.masses = Eigen::VectorXd::Ones(3);
    fx.s.resize(3, 3);
    const double r = 1.0 / std::sqrt(3.0);  // unit moment of inertia
    for (int i = 0; i < 3; ++i) {
        const double th = 2.0 * kPi * i / 3.0;
        fx.s(i, 0) = r * std::cos(th);
        fx.s(i, 1) = r * std::sin(th);
        fx.s(i, 2) = 0.0;
    }
    return fx;
}

Eigen::MatrixXd homothetic_ejection(const EjectionFixture& fx, double t) {
    if (t < 0.0) throw std::invalid_argument("t must be nonnegative");
    const double beta = 2.0 / (2.0 + fx.alpha);
    return std::pow(fx.kappa * t, beta) * fx.s;
}

Eigen::MatrixXd homothetic_ejection_velocity(const EjectionFixture& fx, double t) {
    if (t <= 0.0) throw std::invalid_argument("t must be positive");
    const double beta = 2.0 / (2.0 + fx.alpha);
    return beta * std::pow(fx.kappa, beta) * std::pow(t, beta - 1.0) * fx.s;
}

namespace {

// A(q + v) - A(q) over [0, T] for the standard variation built from the
// per-body displacement rows of delta.  The potential difference is integrated
// pairwise (the unperturbed singular part cancels analytically at t = 0+);
// the kinetic difference is supported on the ramp only.
double delta_action_numeric(const EjectionFixture& fx,
                            const Eigen::MatrixXd& delta, double T) {
    const int n = static_cast<int>(fx.s.rows());
    const double alpha = fx.alpha;
    const double beta = 2.0 / (2.0 + alpha);
    const double nd = delta.norm();
    if (nd == 0.0) return 0.0;
    if (nd >= T / 10.0)
        throw std::invalid_argument("delta too large for the expansion window");
    const double t0 = T - nd;

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Eigen::VectorXd sij =
                std::pow(fx.kappa, beta) * (fx.s.row(i) - fx.s.row(j)).transpose();
            const Eigen::VectorXd dij = (delta.row(i) - delta.row(j)).transpose();
            const double mm = fx.masses[i] * fx.masses[j];
            if (dij.norm() < 1e-15) continue;
            auto dU = [&](double t) {
                const double ramp = (t <= t0) ? 1.0 : (T - t) / nd;
                const Eigen::VectorXd q = std::pow(t, beta) * sij;
                const double rpert = (q + ramp * dij).norm();
                const double rbase = q.norm();
                if (rpert < 1e-12)
                    throw std::domain_error("varied path hits a collision");
                return mm * (std::pow(rpert, -alpha) - std::pow(rbase, -alpha));
            };
            std::vector<double> cuts = {0.0, std::min(1.0, t0), t0, T};
            std::sort(cuts.begin(), cuts.end());
            for (size_t c = 0; c + 1 < cuts.size(); ++c) {
                if (cuts[c + 1] <= cuts[c]) continue;
                total += integrate(dU, cuts[c], cuts[c + 1], 1e-12, 1e-10).value;
            }
        }
    }

    // Kinetic part: v' is the constant -delta/|delta| per body on the ramp.
    auto dK = [&](double t) {
        double acc = 0.0;
        const double vb = beta * std::pow(fx.kappa, beta) * std::pow(t, beta - 1.0);
        for (int i = 0; i < n; ++i) {
            const Eigen::VectorXd qdot = vb * fx.s.row(i).transpose();
            const Eigen::VectorXd vdot = -delta.row(i).transpose() / nd;
            acc += fx.masses[i] * (qdot.dot(vdot) + 0.5 * vdot.squaredNorm());
        }
        return acc;
    };
    total += integrate(dK, t0, T, 1e-12, 1e-10).value;
    return total;
}

} // namespace

DeltaExpansion delta_action_expansion(const EjectionFixture& fx,
                                      const Eigen::MatrixXd& delta, double T) {
    if (delta.rows() != fx.s.rows() || delta.cols() != fx.s.cols())
        throw std::invalid_argument("delta must match the configuration shape");
    DeltaExpansion out;
    const double nd = delta.norm();
    if (nd == 0.0) return out;

    out.delta_action = delta_action_numeric(fx, delta, T);

    const double beta = 2.0 / (2.0 + fx.alpha);
    const int n = static_cast<int>(fx.s.rows());
    double pred = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Eigen::VectorXd sij =
                std::pow(fx.kappa, beta) * (fx.s.row(i) - fx.s.row(j)).transpose();
            const Eigen::VectorXd dij = (delta.row(i) - delta.row(j)).transpose();
            if (dij.norm() < 1e-15) continue;
            pred += fx.masses[i] * fx.masses[j] *
                    eval_S_quadrature(sij, dij, fx.alpha);
        }
    }
    out.prediction = pred;
    out.residual = std::abs(out.delta_action - out.prediction);
    return out;
}

CircleAverageResult circle_average_variation(const EjectionFixture& fx,
                                             const RotatingCircleWitness& witness,
                                             double T, int samples,
                                             double radius) {
    if (samples < 8) throw std::invalid_argument("need at least 8 samples");
    if (!(radius > 0.0 && radius < T / 10.0))
        throw std::invalid_argument("radius must lie in (0, T/10)");
    const GroupAction& action = *witness.subgroup.parent;
    if (action.n != fx.s.rows() || action.d != fx.s.cols())
        throw std::invalid_argument("witness action incompatible with fixture");

    std::vector<int> cluster;
    for (const auto& orbit : homogeneous_orbits(witness.subgroup))
        if (std::find(orbit.begin(), orbit.end(), witness.index) != orbit.end())
            cluster = orbit;

    CircleAverageResult out;
    out.samples = samples;
    double acc = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        const double th = 2.0 * kPi * (k + 0.5) / samples;
        const Eigen::VectorXd p =
            radius * (std::cos(th) * witness.e1 + std::sin(th) * witness.e2);
        const Eigen::VectorXd emb =
            iota_embedding(witness.subgroup, cluster, witness.index, p);
        Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(fx.s.rows(), fx.s.cols());
        for (int i = 0; i < action.n; ++i)
            delta.row(i) = emb.segment(i * action.d, action.d).transpose();
        const double dA = delta_action_numeric(fx, delta, T);
        acc += dA;
        if (dA < best) {
            best = dA;
            out.p_star = p;
        }
    }
    out.mean = acc / samples;
    out.min_value = best;
    return out;
}

} // namespace nbsym
