#include "ktree/kmeans.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>

#include "ktree/rng.hpp"

namespace ktree {

namespace {

constexpr int kMaxIterations = 10000;

std::vector<std::size_t> draw_distinct(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    detail::Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

// Distances in the assign, repair, and objective phases use the expanded form
// ||p||^2 - 2<p,c> + ||c||^2 with both norms precomputed, so each evaluation
// costs O(nnz) for sparse points.
int nearest_centroid(const VectorRef& p, double p_norm,
                     const std::vector<DenseVector>& centroids,
                     const std::vector<double>& centroid_norms) {
    int best = 0;
    double best_d = p_norm - 2.0 * p.dot_with(centroids[0]) + centroid_norms[0];
    for (std::size_t c = 1; c < centroids.size(); ++c) {
        const double d = p_norm - 2.0 * p.dot_with(centroids[c]) + centroid_norms[c];
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

void repair_empty_clusters(std::span<const VectorRef> points,
                           const std::vector<double>& point_norms,
                           const std::vector<DenseVector>& centroids,
                           const std::vector<double>& centroid_norms,
                           std::vector<int>& assignment, std::vector<std::size_t>& sizes) {
    for (std::size_t empty = 0; empty < sizes.size(); ++empty) {
        if (sizes[empty] != 0) continue;
        std::size_t victim = points.size();
        double victim_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (sizes[assignment[i]] < 2) continue;
            const double d = point_norms[i] - 2.0 * points[i].dot_with(centroids[assignment[i]]) +
                             centroid_norms[assignment[i]];
            if (d > victim_d) {
                victim_d = d;
                victim = i;
            }
        }
        if (victim == points.size()) throw std::logic_error("no donor for empty cluster");
        --sizes[assignment[victim]];
        assignment[victim] = static_cast<int>(empty);
        sizes[empty] = 1;
    }
}

KMeansResult lloyd(std::span<const VectorRef> points, std::span<const std::size_t> initial) {
    const std::size_t n = points.size();
    const std::size_t k = initial.size();
    const std::size_t dim = points[0].dim();

    KMeansResult result;
    result.centroids.reserve(k);
    for (const std::size_t i : initial) {
        DenseVector c(dim);
        points[i].add_to(c);
        result.centroids.push_back(std::move(c));
    }
    result.assignment.assign(n, -1);

    std::vector<double> point_norms(n);
    for (std::size_t i = 0; i < n; ++i) point_norms[i] = points[i].norm_squared();

    std::vector<int> next(n);
    std::vector<std::size_t> sizes(k);
    std::vector<double> centroid_norms(k);
    for (std::size_t c = 0; c < k; ++c) centroid_norms[c] = norm_squared(result.centroids[c]);
    while (result.iterations < kMaxIterations) {
        ++result.iterations;
        sizes.assign(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = nearest_centroid(points[i], point_norms[i], result.centroids,
                                       centroid_norms);
            ++sizes[next[i]];
        }
        repair_empty_clusters(points, point_norms, result.centroids, centroid_norms, next, sizes);
        const bool changed = next != result.assignment;
        result.assignment = next;

        for (std::size_t c = 0; c < k; ++c) {
            result.centroids[c].scale(0.0);
        }
        for (std::size_t i = 0; i < n; ++i) {
            points[i].add_to(result.centroids[result.assignment[i]]);
        }
        for (std::size_t c = 0; c < k; ++c) {
            result.centroids[c].scale(1.0 / static_cast<double>(sizes[c]));
            centroid_norms[c] = norm_squared(result.centroids[c]);
        }

        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const int c = result.assignment[i];
            objective += point_norms[i] - 2.0 * points[i].dot_with(result.centroids[c]) +
                         centroid_norms[c];
        }
        result.objective = objective;
        result.objective_history.push_back(objective);

        if (!changed) break;
    }
    return result;
}

}  // namespace

KMeansResult kmeans(std::span<const VectorRef> points, std::size_t k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (k > points.size()) throw std::invalid_argument("k exceeds point count");
    return lloyd(points, draw_distinct(points.size(), k, seed));
}

KMeansResult kmeans_from_indices(std::span<const VectorRef> points,
                                 std::span<const std::size_t> initial) {
    if (initial.empty()) throw std::invalid_argument("no initial centroids");
    for (const std::size_t i : initial) {
        if (i >= points.size()) throw std::invalid_argument("initial index out of range");
    }
    return lloyd(points, initial);
}

std::vector<std::size_t> select_medoids(std::span<const VectorRef> points,
                                        const KMeansResult& result) {
    const std::size_t k = result.centroids.size();
    std::vector<std::size_t> medoids(k, points.size());
    std::vector<double> best(k, std::numeric_limits<double>::infinity());
    std::vector<double> centroid_norms(k);
    for (std::size_t c = 0; c < k; ++c) centroid_norms[c] = norm_squared(result.centroids[c]);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const int c = result.assignment[i];
        const double d = points[i].norm_squared() -
                         2.0 * points[i].dot_with(result.centroids[c]) + centroid_norms[c];
        if (d < best[c]) {
            best[c] = d;
            medoids[c] = i;
        }
    }
    for (const std::size_t m : medoids) {
        if (m == points.size()) throw std::logic_error("cluster without members");
    }
    return medoids;
}

}  // namespace ktree
