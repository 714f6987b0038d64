#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nbsym/symmetry.hpp"

namespace nbsym {

// S(xi, delta) = int_0^inf [ |t^q xi + delta|^-a - |t^q xi|^-a ] dt, q = 2/(2+a).
// Absolute accuracy target 1e-9. Throws std::domain_error when the path passes
// within 1e-3*|delta| of the origin and alpha >= 1 (divergent); warns otherwise.
double eval_S_quadrature(const Eigen::VectorXd& xi, const Eigen::VectorXd& delta,
                         double alpha);

struct AveragingResult {
    double value_series = 0.0;
    double value_quadrature = 0.0;
    double truncation_bound = 0.0;
    int sample_count = 0;
    int truncation_order = 0;
};

// Circle average of S over unit delta running around a unit circle whose
// plane contains unit xi, evaluated by the explicit series. value_quadrature
// is left 0 here.
AveragingResult eval_Stilde_series(double alpha, int K = 100000);

// Closed-form upper bound for the series value; negative for alpha in (0,2).
double stilde_upper_bound(double alpha);

// Bound on the tail of the series after K terms.
double stilde_truncation_bound(double alpha, int K);

struct CircleSpec {
    Eigen::VectorXd e1, e2;
    double radius = 1.0;
};

// Circle average of S(xi, .) over the circle radius*(cos theta e1 + sin theta e2)
// by adaptive trapezoid quadrature (exploits the theta -> -theta pairing).
double eval_Stilde_quadrature(const Eigen::VectorXd& xi, const CircleSpec& circle,
                              double alpha, double tol = 1e-9);

// Stilde for |xi| = 1 tilted by angle gamma out of the circle plane.
std::vector<double> gamma_profile(double alpha, const std::vector<double>& gammas);

// Angular average of |1 + x e^{i theta}|^{-alpha}; power series value. x != 1.
double fourier_average(double x, double alpha);

// Piecewise-linear cutoff path: delta for t <= T-|delta|, linear to 0 at t = T.
Eigen::VectorXd standard_variation(const Eigen::VectorXd& delta, double T, double t);

struct EjectionFixture {
    Eigen::MatrixXd s;       // n x d central configuration, centered, I(s) = 1
    Eigen::VectorXd masses;
    double alpha = 1.0;
    double kappa = 1.0;
};

// kappa making q(t) = (kappa t)^{2/(2+alpha)} s a solution.
double parabolic_kappa(const Eigen::MatrixXd& s, const Eigen::VectorXd& masses,
                       double alpha);

// Equal-mass equilateral triangle in the plane z = 0 of R^3, normalized.
EjectionFixture equilateral_fixture(double alpha);

Eigen::MatrixXd homothetic_ejection(const EjectionFixture& fx, double t);
Eigen::MatrixXd homothetic_ejection_velocity(const EjectionFixture& fx, double t);

struct DeltaExpansion {
    double delta_action = 0.0;   // A(q + v) - A(q) over [0, T]
    double prediction = 0.0;     // |delta|^{1-alpha/2} sum_{i<j} m_i m_j S(...)
    double residual = 0.0;
};
DeltaExpansion delta_action_expansion(const EjectionFixture& fx,
                                      const Eigen::MatrixXd& delta, double T);

struct CircleAverageResult {
    double mean = 0.0;
    double min_value = 0.0;
    Eigen::VectorXd p_star;  // minimizing circle sample
    int samples = 0;
};
CircleAverageResult circle_average_variation(const EjectionFixture& fx,
                                             const RotatingCircleWitness& witness,
                                             double T, int samples,
                                             double radius = 0.05);

} // namespace nbsym
