#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace todlab {

// How well a per-sample score predicts the per-sample true loss.
struct QualityReport {
    double spearman_rho = 0.0;
    // Mean true loss inside each 10% band of samples ordered by descending
    // score; band 0 holds the highest-scored samples.
    std::array<double, 10> decile_mean_losses{};
    // (p, recall): fraction of the true top-p%-loss samples that also land
    // in the top p% by score, for p in {5,10,20,30,40,50}.
    std::vector<std::pair<int, double>> recall_at_p;
};

// Ranks 1..n ascending by value; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> v);

// Spearman rank correlation with average-rank tie handling.
double spearman(std::span<const double> a, std::span<const double> b);

// Requires equal lengths >= 10.
QualityReport loss_estimation_quality(std::span<const double> scores,
                                      std::span<const double> losses);

}  // namespace todlab
