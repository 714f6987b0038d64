#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nbsym/group.hpp"

namespace nbsym {

// Periodic loop sampled at t_j = j*T/M, j = 0..M-1.
// Storage layout: x[(j*n + i)*d + c] = coordinate c of body i at sample j.
struct Loop {
    int n = 0;
    int d = 0;
    int M = 0;
    double T = 1.0;
    Eigen::VectorXd masses;
    Eigen::VectorXd x;

    double& at(int j, int i, int c) { return x[(static_cast<long>(j) * n + i) * d + c]; }
    double at(int j, int i, int c) const { return x[(static_cast<long>(j) * n + i) * d + c]; }
    Eigen::VectorXd body(int j, int i) const { return x.segment(static_cast<long>(j * n + i) * d, d); }
    long size() const { return static_cast<long>(M) * n * d; }
};

Loop make_loop(int n, int d, int M, double T, const Eigen::VectorXd& masses);
Loop make_loop(const GroupAction& action, int M);

// Spectral operations (trigonometric interpolation; Nyquist mode dropped).
Loop derivative(const Loop& loop, int order = 1);
Loop time_shift(const Loop& loop, double s);      // Y(t) = X(t + s)
Loop time_reflect(const Loop& loop, double c2);   // Y(t) = X(c2 - t)
Loop resample(const Loop& loop, int M);

// Group action on loops and the averaging projector.
Loop act(const GroupAction& action, int element, const Loop& loop);
Loop project_equivariant(const Loop& loop, const GroupAction& action);

void center_masses(Loop& loop);
double centering_residual(const Loop& loop);
double equivariance_residual(const Loop& loop, const GroupAction& action);
double min_pairwise_distance(const Loop& loop);
double loop_sup_distance(const Loop& a, const Loop& b);

// Mass-weighted L2 inner product of two loops (trapezoid = exact on the grid).
double l2_inner(const Loop& a, const Loop& b);
double l2_norm(const Loop& a);
// H1 inner product: mass-weighted <u',v'> + (2*pi/T)^2 <u,v>.
double h1_inner(const Loop& a, const Loop& b);

// Action functional. Potential softening (r^2 + eps^2)^(-alpha/2) when eps > 0.
// Omega, if given, must be a d x d skew-symmetric matrix (rotating frame).
double action_value(const Loop& loop, double alpha,
                    const std::optional<Eigen::MatrixXd>& Omega = std::nullopt,
                    double eps = 0.0);
double kinetic_integral(const Loop& loop,
                        const std::optional<Eigen::MatrixXd>& Omega = std::nullopt);
double potential_integral(const Loop& loop, double alpha, double eps = 0.0);

// Discrete L2 gradient of the action (scaled samples of the gradient loop).
Eigen::VectorXd action_gradient(const Loop& loop, double alpha,
                                const std::optional<Eigen::MatrixXd>& Omega = std::nullopt,
                                double eps = 0.0);

// Applies the inverse of the mass-weighted H1 operator m(-d^2/dt^2 + (2pi/T)^2)
// mode by mode. Used as the quasi-Newton base metric.
Eigen::VectorXd h1_precondition(const Loop& shape, const Eigen::VectorXd& g);

// Relative L2 norm of m_i x_i'' - dU/dx_i, normalized by ||dU/dx||_L2.
double newton_residual(const Loop& loop, double alpha);

struct EnergySeries {
    Eigen::VectorXd kinetic;
    Eigen::VectorXd potential;
    Eigen::VectorXd energy;
    double drift = 0.0; // sup |E - mean E| / max(|mean E|, 1)
};
EnergySeries energy_series(const Loop& loop, double alpha);

struct PartialQuantities {
    Eigen::VectorXd kinetic;    // K_k(t_j)
    Eigen::VectorXd potential;  // U_k(t_j), pairs inside the cluster
    Eigen::VectorXd energy;     // E_k = K_k - U_k
    Eigen::VectorXd inertia;    // I_k about the cluster center of mass
    Eigen::VectorXd cross;      // U - U_k - U_k'
};
PartialQuantities partial_quantities(const Loop& loop, double alpha,
                                     const std::vector<int>& cluster);

struct ActionReport {
    double action = 0.0;
    double kinetic_integral = 0.0;
    double potential_integral = 0.0;
    double min_pairwise_distance = 0.0;
    double newton_residual = 0.0;
    double energy_drift = 0.0;
};
ActionReport action_report(const Loop& loop, double alpha);

} // namespace nbsym
