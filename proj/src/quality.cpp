#include "todlab/quality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace todlab {

std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (v[a] != v[b]) return v[a] < v[b];
        return a < b;
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        // positions i..j (0-based) share the average of ranks i+1..j+1
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("spearman: length mismatch");
    if (a.size() < 2) throw std::invalid_argument("spearman: need at least 2 samples");
    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n + 1.0) / 2.0;  // ranks always average to (n+1)/2
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = ra[i] - mean;
        const double db = rb[i] - mean;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) return 0.0;  // a constant input has no ranking
    return cov / std::sqrt(var_a * var_b);
}

namespace {

// Sample indices by descending value; ties broken by ascending index.
std::vector<std::size_t> descending_order(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (v[a] != v[b]) return v[a] > v[b];
        return a < b;
    });
    return order;
}

}  // namespace

QualityReport loss_estimation_quality(std::span<const double> scores,
                                      std::span<const double> losses) {
    if (scores.size() != losses.size())
        throw std::invalid_argument("loss_estimation_quality: length mismatch");
    const std::size_t n = scores.size();
    if (n < 10) throw std::invalid_argument("loss_estimation_quality: need at least 10 samples");

    QualityReport rep;
    rep.spearman_rho = spearman(scores, losses);

    const std::vector<std::size_t> by_score = descending_order(scores);
    std::array<double, 10> band_sum{};
    std::array<std::size_t, 10> band_count{};
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t band = pos * 10 / n;
        band_sum[band] += losses[by_score[pos]];
        ++band_count[band];
    }
    for (int b = 0; b < 10; ++b)
        rep.decile_mean_losses[b] = band_sum[b] / static_cast<double>(band_count[b]);

    const std::vector<std::size_t> by_loss = descending_order(losses);
    std::vector<char> in_top_by_score(n, 0);
    for (const int p : {5, 10, 20, 30, 40, 50}) {
        const std::size_t k = std::max<std::size_t>(1, n * static_cast<std::size_t>(p) / 100);
        std::fill(in_top_by_score.begin(), in_top_by_score.end(), 0);
        for (std::size_t i = 0; i < k; ++i) in_top_by_score[by_score[i]] = 1;
        std::size_t caught = 0;
        for (std::size_t i = 0; i < k; ++i) caught += in_top_by_score[by_loss[i]];
        rep.recall_at_p.emplace_back(p, static_cast<double>(caught) / static_cast<double>(k));
    }
    return rep;
}

}  // namespace todlab
