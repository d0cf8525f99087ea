#pragma once

// Ridge regression under a variance-profile design: the (gamma, b) fixed
// point, its contraction solvers, the closed-form estimator, the AMP form of
// the estimator and the Gaussian sequence-model moments.
//
// Notation: W = V o V / m (m x n), tau_b = (W^T (1 - b))^{-1}, u = (1 - b) / lambda.

#include "vpamp/amp.hpp"
#include "vpamp/ensembles.hpp"

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace vpamp {

class RidgeProblem {
public:
    /// Needs a rectangular profile with positive row and column norms,
    /// lambda > 0, mu0 of length n and xi of length m.
    RidgeProblem(VarianceProfile profile, double lambda, Vector mu0, Vector xi);

    const VarianceProfile& profile() const noexcept { return profile_; }
    double lambda() const noexcept { return lambda_; }
    const Vector& mu0() const noexcept { return mu0_; }
    const Vector& xi() const noexcept { return xi_; }
    /// W = V o V / m.
    const Matrix& w() const noexcept { return w_; }
    Index m() const noexcept { return w_.rows(); }
    Index n() const noexcept { return w_.cols(); }

    /// Same profile and data at another lambda.
    RidgeProblem with_lambda(double lambda) const;

private:
    VarianceProfile profile_;
    double lambda_;
    Vector mu0_;
    Vector xi_;
    Matrix w_;
};

struct RidgeFixedPoint {
    double lambda = 0.0;
    Vector b;     // length m, in [0, 1)
    Vector tau;   // length n
    Vector gamma; // length n
    Vector zeta;  // tau^{-1} gamma^2
    int b_iterations = 0;
    int gamma_iterations = 0;
    double b_gap = 0.0;     // final successive-iterate sup gap of u
    double gamma_gap = 0.0; // final successive-iterate sup gap of zeta
    std::vector<double> b_gap_log;
    double residual_b = 0.0;     // sup |b/(1-b) - W (tau/(1+lambda tau))|
    double residual_gamma = 0.0; // sup |gamma^2 - rhs|
};

/// |x - y|^2 / (x y) for x, y > 0.
double dR_metric(double x, double y);
/// max_k dR(x_k, y_k).
double dR_metric(const Vector& x, const Vector& y);

/// 1 / (lambda + W (1 + W^T u)^{-1}), componentwise. Needs u > 0.
Vector phi_map(const Vector& u, const RidgeProblem& problem);

/// The box [lower, upper]^m that phi maps into itself at this lambda, with
/// eta = min(lambda, 1/lambda): lower = eta / (1 + eta max_k |V_k.|^2 / m), upper = 1 / eta.
std::pair<double, double> phi_admissible_box(const RidgeProblem& problem);

/// (1 + (1 / upper) / (max over rows and columns of |V|^2 / m))^{-4}.
double phi_contraction_bound(const RidgeProblem& problem);

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 10000;
    /// u <- (1 - damping) Phi(u) + damping u. Off by default.
    double damping = 0.0;
};

/// Picard iteration on u from u0 = 1 / (lambda + row sums of W), then
/// b = 1 - lambda u. Fills b, tau, the iteration log and residual_b.
/// Throws ConvergenceError after max_iter.
RidgeFixedPoint solve_b(const RidgeProblem& problem, const SolveOptions& options = {});

/// q_b = D_tau^2 W^T D_{1-b}^2 (xi^2 + W (lambda tau / (1 + lambda tau))^2 mu0^2).
Vector ridge_q(const RidgeProblem& problem, const Vector& b, const Vector& tau);

/// Psi(zeta) = tau^{-1} q + D_tau W^T D_{1-b}^2 W (tau / (1 + lambda tau)^2 o zeta).
Vector psi_map(const Vector& zeta, const Vector& b, const Vector& tau, const RidgeProblem& problem);

/// Picard iteration on zeta from 0; fills gamma, zeta and residual_gamma of `fp`.
void solve_gamma(const RidgeProblem& problem, RidgeFixedPoint& fp, const SolveOptions& options = {});

/// solve_b followed by solve_gamma.
RidgeFixedPoint solve_fixed_point(const RidgeProblem& problem, const SolveOptions& options = {});

/// Residuals of both fixed-point equations at (gamma, b): {first, second}.
std::pair<double, double> fixed_point_residuals(const RidgeProblem& problem, const Vector& b, const Vector& gamma);

/// argmin 0.5 |Y - A mu|^2 + 0.5 lambda |mu|^2 via a Cholesky solve of
/// (A^T A + lambda I) when n <= m, otherwise of (A A^T + lambda I) in the dual.
Vector ridge_closed_form(const Matrix& a, const Vector& y, double lambda);

struct RidgeAmpTrajectory {
    std::vector<Vector> r;     // r^(0..T), length m
    std::vector<Vector> theta; // theta^(0..T), length n
    std::vector<Vector> big_r; // R^(t) = D_{1-b}^{1/2} r^(t)
    std::vector<Vector> mu;    // mu^(t) = D_tau^{1/2} theta^(t)
};

/// r^(t+1) = A_b (theta_0 - theta^(t)) + xi_b + b o r^(t),
/// theta^(t+1) = (theta^(t) + A_b^T r^(t+1)) / (1 + lambda tau),
/// with A_b = D_{1-b}^{1/2} A D_tau^{1/2}, xi_b = D_{1-b}^{1/2} xi, theta_0 = D_tau^{-1/2} mu0,
/// from r^(0) = 0 and theta^(0) = theta_0.
RidgeAmpTrajectory amp_ridge_run(const RidgeProblem& problem, const RidgeFixedPoint& fp, const Matrix& a, int horizon);

/// The same iteration written as a standard asymmetric AMP on (V_b, A_b):
/// F_t(v) = (theta_0 - v) / (1 + lambda tau) - theta_0 and G_t(u) = u - xi_b for t >= 1,
/// both zero at t = 0, v^(0) = 0. The matching Onsager vectors are
/// b^F_t = -b and b^G_t = 1_n, which is what the data-driven rule produces.
struct RidgeAsymForm {
    VarianceProfile profile;
    SampledMatrix matrix;
    NonlinearitySchedule f;
    NonlinearitySchedule g;
    Vector v0;
    Vector xi_b;
    Vector theta0;
};
RidgeAsymForm ridge_asym_form(const RidgeProblem& problem, const RidgeFixedPoint& fp, const Matrix& a, int horizon);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Mean mu0_j / (1 + lambda tau_j) and variance (gamma_j / (1 + lambda tau_j))^2
/// of the sequence estimator at coordinate j.
Moments seq_moments(const RidgeFixedPoint& fp, const Vector& mu0, Index j);

/// Mean (1 - b_i) xi_i and variance
/// (1 - b_i)^2 sum_l W_il tau_l / (1 + lambda tau_l)^2 (lambda^2 tau_l mu0_l^2 + gamma_l^2 / tau_l).
std::vector<Moments> residual_moments(const RidgeFixedPoint& fp, const RidgeProblem& problem);

/// n^{-1} sum_j (lambda tau_j mu0_j / (1 + lambda tau_j))^2 + (gamma_j / (1 + lambda tau_j))^2.
double theory_l2_error(const RidgeFixedPoint& fp, const Vector& mu0);

struct ContractionCertificate {
    int pairs = 0;
    double phi_max_ratio = 0.0; // max dR(Phi u, Phi w) / dR(u, w) over log-uniform pairs in the box
    double phi_bound = 0.0;
    double psi_max_ratio = 0.0; // max |Psi z1 - Psi z2|_inf / |z1 - z2|_inf over pairs in [0, 2 max zeta*]
    double max_b = 0.0;
    bool phi_ok() const noexcept { return phi_max_ratio < 1.0 && phi_max_ratio <= phi_bound * (1.0 + 1e-12); }
    bool psi_ok() const noexcept { return psi_max_ratio <= max_b + 1e-12; }
};

/// Empirical contraction ratios of Phi and Psi on random pairs.
ContractionCertificate certify_contraction(const RidgeProblem& problem, const RidgeFixedPoint& fp, int pairs,
                                           std::uint64_t seed);

/// Rows (coordinate, b, tau, gamma, zeta); fields past a vector's length are empty.
void write_fixed_point_csv(const RidgeFixedPoint& fp, const std::filesystem::path& path);

} // namespace vpamp
