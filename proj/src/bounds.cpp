#include "todlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "todlab/kernels.hpp"
#include "todlab/optim.hpp"
#include "todlab/rng.hpp"

namespace todlab {

namespace {

BoundReport make_report(double lhs, double rhs, double eta, int T, double slack) {
    BoundReport rep;
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.eta = eta;
    rep.T = T;
    if (rhs > 0.0)
        rep.ratio = lhs / rhs;
    else
        rep.ratio = (lhs == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    rep.satisfied_with_slack = lhs <= rhs * (1.0 + slack);
    return rep;
}

double l2_norm(std::span<const double> v) {
    double sq = 0.0;
    for (double e : v) sq += e * e;
    return std::sqrt(sq);
}

}  // namespace

Trajectory record_gd_trajectory(const MLPSpec& spec, const ParamVector& init,
                                std::span<const double> x, double y, double eta, int steps) {
    check_params(spec, init);
    if (spec.output_dim() != 1)
        throw std::invalid_argument("record_gd_trajectory: requires a scalar-output model");
    if (steps < 1) throw std::invalid_argument("record_gd_trajectory: steps must be >= 1");
    Trajectory traj;
    traj.spec = spec;
    traj.x.assign(x.begin(), x.end());
    traj.y = y;
    traj.eta = eta;
    ParamVector w = init;
    for (int s = 0; s <= steps; ++s) {
        const double f = forward(spec, w, x)[0];
        traj.losses.push_back(loss_euclidean(f, y));
        traj.grad_norms.push_back(l2_norm(grad_output(spec, w, x, 0)));
        traj.snapshots.push_back({w, 0, 0, s});
        if (s < steps) w = plain_gd_step(spec, w, x, y, eta);
    }
    return traj;
}

BoundReport verify_theorem1(const MLPSpec& spec, const ParamVector& params,
                            std::span<const double> x, double y, double eta, double slack) {
    check_params(spec, params);
    if (spec.output_dim() != 1)
        throw std::invalid_argument("verify_theorem1: requires a scalar-output model");
    const double f0 = forward(spec, params, x)[0];
    const double loss = loss_euclidean(f0, y);
    const double grad_norm = l2_norm(grad_output(spec, params, x, 0));
    const ParamVector next = plain_gd_step(spec, params, x, y, eta);
    const double f1 = forward(spec, next, x)[0];

    const double lhs = std::abs(f1 - f0);
    const double rhs = eta * std::sqrt(2.0 * loss) * grad_norm * grad_norm;
    BoundReport rep = make_report(lhs, rhs, eta, 1, slack);
    rep.rhs_unsquared_gradnorm = eta * std::sqrt(2.0 * loss) * grad_norm;
    return rep;
}

namespace {

void check_window(const Trajectory& traj, int t, int T) {
    if (t < 0 || T < 1 || t + T > traj.n_steps())
        throw std::invalid_argument("bound check: trajectory does not cover steps [" +
                                    std::to_string(t) + ", " + std::to_string(t + T) + "]");
}

}  // namespace

BoundReport verify_corollary_T(const Trajectory& traj, int t, int T, double slack) {
    check_window(traj, t, T);
    const double lhs = tod(traj.spec, traj.snapshots[t].params, traj.snapshots[t + T].params,
                           traj.x, OutputSpace::logits);
    double sum = 0.0;
    for (int tau = t; tau < t + T; ++tau)
        sum += std::sqrt(traj.losses[tau]) * traj.grad_norms[tau] * traj.grad_norms[tau];
    const double rhs = std::sqrt(2.0) * traj.eta * sum;
    return make_report(lhs, rhs, traj.eta, T, slack);
}

BoundReport verify_corollary_accumulated(const Trajectory& traj, int t, int T, double C,
                                         double slack) {
    check_window(traj, t, T);
    double loss_sum = 0.0;
    double max_sq = 0.0;
    for (int tau = t; tau < t + T; ++tau) {
        loss_sum += traj.losses[tau];
        max_sq = std::max(max_sq, traj.grad_norms[tau] * traj.grad_norms[tau]);
    }
    if (C < max_sq)
        throw std::invalid_argument("verify_corollary_accumulated: C smaller than the observed "
                                    "max of ||grad f||^2");
    const double lhs = tod(traj.spec, traj.snapshots[t].params, traj.snapshots[t + T].params,
                           traj.x, OutputSpace::logits);
    const double rhs = std::sqrt(2.0 * T) * traj.eta * C * std::sqrt(loss_sum);
    return make_report(lhs, rhs, traj.eta, T, slack);
}

GradNormSummary estimate_C(const MLPSpec& spec, const std::vector<ParamVector>& snapshots,
                           std::span<const double> xs, std::size_t n) {
    if (snapshots.empty() || n == 0)
        throw std::invalid_argument("estimate_C: need at least one snapshot and one sample");
    GradNormSummary sum;
    double total = 0.0, total_sq = 0.0;
    const std::size_t count = snapshots.size() * n;
    for (const ParamVector& w : snapshots) {
        const std::vector<double> sq = grad_sq_norms(spec, w, xs, n);
        for (double v : sq) {
            total += v;
            total_sq += v * v;
            sum.max = std::max(sum.max, v);
        }
    }
    sum.mean = total / static_cast<double>(count);
    sum.stddev = std::sqrt(std::max(0.0, total_sq / static_cast<double>(count) - sum.mean * sum.mean));
    return sum;
}

double spectral_norm(const Matrix& a, double rel_tol, std::uint64_t seed) {
    if (a.rows < 1 || a.cols < 1 || a.data.size() != static_cast<std::size_t>(a.rows) * a.cols)
        throw std::invalid_argument("spectral_norm: bad matrix shape");
    double frob = 0.0;
    for (double v : a.data) frob += v * v;
    if (frob == 0.0) return 0.0;

    Rng rng(mix_seed(seed, rng_tag("power_iter")));
    std::vector<double> v(a.cols);
    for (double& e : v) e = rng.normal();
    std::vector<double> u(a.rows), w(a.cols);

    double lambda_prev = 0.0;
    for (int iter = 0; iter < 100000; ++iter) {
        // u = A v; w = A^T u  (one multiplication by A^T A)
        for (int i = 0; i < a.rows; ++i) {
            double s = 0.0;
            for (int j = 0; j < a.cols; ++j) s += a.at(i, j) * v[j];
            u[i] = s;
        }
        for (int j = 0; j < a.cols; ++j) {
            double s = 0.0;
            for (int i = 0; i < a.rows; ++i) s += a.at(i, j) * u[i];
            w[j] = s;
        }
        const double norm_v = l2_norm(v);
        double vw = 0.0;
        for (int j = 0; j < a.cols; ++j) vw += v[j] * w[j];
        const double lambda = vw / (norm_v * norm_v);  // Rayleigh quotient for A^T A
        const double norm_w = l2_norm(w);
        if (norm_w == 0.0) {
            // v landed in the null space; restart from a fresh direction.
            for (double& e : v) e = rng.normal();
            lambda_prev = 0.0;
            continue;
        }
        for (int j = 0; j < a.cols; ++j) v[j] = w[j] / norm_w;
        if (iter > 0 && std::abs(lambda - lambda_prev) <= rel_tol * std::abs(lambda))
            return std::sqrt(lambda);
        lambda_prev = lambda;
    }
    return std::sqrt(lambda_prev);
}

LipschitzReport lipschitz_check(const Matrix& w, const std::vector<double>& b, const Matrix& r,
                                const std::vector<double>& x) {
    if (w.rows != static_cast<int>(x.size()) || w.cols != static_cast<int>(b.size()) ||
        r.rows != w.rows || r.cols != w.cols)
        throw std::invalid_argument("lipschitz_check: shape mismatch");
    const int out = w.cols;
    double lhs_sq = 0.0;
    for (int j = 0; j < out; ++j) {
        double z0 = b[j], z1 = b[j];
        for (int i = 0; i < w.rows; ++i) {
            z0 += w.at(i, j) * x[i];
            z1 += (w.at(i, j) + r.at(i, j)) * x[i];
        }
        const double h0 = std::max(0.0, z0);
        const double h1 = std::max(0.0, z1);
        lhs_sq += (h1 - h0) * (h1 - h0);
    }
    LipschitzReport rep;
    rep.lhs = std::sqrt(lhs_sq);
    rep.rhs = l2_norm(x) * spectral_norm(r);
    rep.satisfied = rep.lhs <= rep.rhs;
    return rep;
}

}  // namespace todlab
