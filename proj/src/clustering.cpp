#include "scgc/clustering.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace scgc {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

struct Nearest {
    std::size_t index = 0;
    double distance = std::numeric_limits<double>::infinity();
};

Nearest nearest_centroid(std::span<const double> point, const Matrix& centroids) {
    Nearest best;
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double d = sq_dist(point, centroids.row(c));
        if (d < best.distance) best = {c, d};
    }
    return best;
}

Matrix seed_plus_plus(const Matrix& points, std::size_t clusters, Rng& rng) {
    const std::size_t n = points.rows();
    Matrix centroids(clusters, points.cols());
    auto copy_point = [&](std::size_t c, std::size_t i) {
        auto src = points.row(i);
        std::copy(src.begin(), src.end(), centroids.row(c).begin());
    };

    copy_point(0, static_cast<std::size_t>(rng.uniform_index(n)));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points.row(i), centroids.row(0));

    for (std::size_t c = 1; c < clusters; ++c) {
        double total = 0.0;
        for (double d : d2) total += d;
        std::size_t chosen = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target && d2[i] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = static_cast<std::size_t>(rng.uniform_index(n));
        }
        copy_point(c, chosen);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points.row(i), centroids.row(c)));
    }
    return centroids;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t clusters, Rng& rng, const KMeansOptions& options) {
    const std::size_t n = points.rows();
    if (clusters < 2) throw std::invalid_argument("kmeans: need at least 2 clusters");
    if (n < clusters) {
        throw std::invalid_argument("kmeans: " + std::to_string(n) + " points cannot form " +
                                    std::to_string(clusters) + " clusters");
    }
    if (options.max_iter == 0) throw std::invalid_argument("kmeans: max_iter must be >= 1");

    KMeansResult result;
    result.centroids = seed_plus_plus(points, clusters, rng);
    result.assignments.assign(n, 0);
    std::vector<double> distance(n);

    for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto best = nearest_centroid(points.row(i), result.centroids);
            result.assignments[i] = static_cast<int>(best.index);
            distance[i] = best.distance;
            inertia += best.distance;
        }
        result.inertia = inertia;
        result.inertia_history.push_back(inertia);
        result.iterations = iter + 1;

        Matrix updated(clusters, points.cols());
        std::vector<std::size_t> counts(clusters, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(result.assignments[i]);
            ++counts[c];
            auto dst = updated.row(c);
            auto src = points.row(i);
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
        }
        for (std::size_t c = 0; c < clusters; ++c) {
            if (counts[c] == 0) {
                // Farthest point from its own centroid; ties to the lower index.
                std::size_t far = 0;
                for (std::size_t i = 1; i < n; ++i)
                    if (distance[i] > distance[far]) far = i;
                auto src = points.row(far);
                std::copy(src.begin(), src.end(), updated.row(c).begin());
                distance[far] = 0.0;
                continue;
            }
            for (double& v : updated.row(c)) v /= static_cast<double>(counts[c]);
        }

        double max_shift = 0.0;
        for (std::size_t c = 0; c < clusters; ++c)
            max_shift = std::max(max_shift, std::sqrt(sq_dist(updated.row(c), result.centroids.row(c))));
        result.centroids = std::move(updated);
        if (max_shift < options.tol) break;
    }

    // Final labels and inertia must describe the returned centroids.
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto best = nearest_centroid(points.row(i), result.centroids);
        result.assignments[i] = static_cast<int>(best.index);
        inertia += best.distance;
    }
    result.inertia = inertia;
    result.inertia_history.push_back(inertia);
    return result;
}

std::vector<int> hard_labels(const Matrix& q) {
    std::vector<int> labels(q.rows(), 0);
    for (std::size_t i = 0; i < q.rows(); ++i) {
        auto row = q.row(i);
        std::size_t best = 0;
        for (std::size_t u = 1; u < row.size(); ++u)
            if (row[u] > row[best]) best = u;
        labels[i] = static_cast<int>(best);
    }
    return labels;
}

}  // namespace scgc
