#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "todlab/discrepancy.hpp"
#include "todlab/mlp.hpp"

namespace todlab {

// One verified inequality: lhs = observed output change, rhs = the bound.
struct BoundReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;  // lhs/rhs when rhs > 0; 0 if both 0; inf if only rhs is 0
    double eta = 0.0;
    int T = 0;
    bool satisfied_with_slack = false;  // lhs <= rhs * (1 + slack)
    // One-step variant computed with ||grad_w f|| in place of ||grad_w f||^2,
    // reported alongside for comparison; 0 for the multi-step checks.
    double rhs_unsquared_gradnorm = 0.0;
};

// Every step of a single-sample plain-GD run on the euclidean loss, together
// with the per-step loss and output-gradient norm that the accumulated
// bounds consume.
struct Trajectory {
    MLPSpec spec;
    std::vector<double> x;  // the probe sample
    double y = 0.0;
    double eta = 0.0;
    std::vector<Snapshot> snapshots;  // steps 0..n_steps inclusive
    std::vector<double> losses;       // loss at each snapshot
    std::vector<double> grad_norms;   // ||grad_w f|| at each snapshot

    int n_steps() const { return static_cast<int>(snapshots.size()) - 1; }
};

// Runs `steps` plain-GD steps from init on the sample (x, y), recording
// every intermediate state. Scalar-output models only.
Trajectory record_gd_trajectory(const MLPSpec& spec, const ParamVector& init,
                                std::span<const double> x, double y, double eta, int steps);

// One-step output-change bound: lhs = |f(x; w') - f(x; w)| after a single
// plain-GD step, rhs = eta * sqrt(2 * loss) * ||grad_w f||^2.
BoundReport verify_theorem1(const MLPSpec& spec, const ParamVector& params,
                            std::span<const double> x, double y, double eta, double slack);

// T-step accumulated bound, per-step form:
// rhs = sqrt(2) * eta * sum_{tau=t}^{t+T-1} sqrt(loss_tau) * ||grad f_tau||^2.
BoundReport verify_corollary_T(const Trajectory& traj, int t, int T, double slack);

// T-step accumulated bound, aggregate form with a gradient-norm cap C:
// rhs = sqrt(2*T) * eta * C * sqrt(sum loss_tau). C must dominate the
// observed max of ||grad f||^2 over the window (else rejected).
BoundReport verify_corollary_accumulated(const Trajectory& traj, int t, int T, double C,
                                         double slack);

struct GradNormSummary {
    double mean = 0.0;
    double stddev = 0.0;  // population
    double max = 0.0;
};

// Statistics of ||grad_w f||^2 (Frobenius norm over outputs) across
// snapshots x samples; .max is a valid cap for verify_corollary_accumulated
// on the same data.
GradNormSummary estimate_C(const MLPSpec& spec, const std::vector<ParamVector>& snapshots,
                           std::span<const double> xs, std::size_t n);

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // row-major

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
};

// Largest singular value via power iteration on A^T A, run to the given
// relative tolerance on the Rayleigh quotient.
double spectral_norm(const Matrix& a, double rel_tol = 1e-9, std::uint64_t seed = 0x5eed);

struct LipschitzReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;  // exact inequality, no slack
};

// Perturbation bound of a ReLU layer h(x) = relu(W^T x + b):
// ||h_{W+r}(x) - h_W(x)|| <= ||x|| * spectral_norm(r).
// W and r are dim(x) x dim(b).
LipschitzReport lipschitz_check(const Matrix& w, const std::vector<double>& b, const Matrix& r,
                                const std::vector<double>& x);

}  // namespace todlab
