#pragma once

#include "scgc/matrix.hpp"
#include "scgc/rng.hpp"

#include <cstddef>
#include <vector>

namespace scgc {

struct KMeansResult {
    Matrix centroids;
    std::vector<int> assignments;
    double inertia = 0.0;
    std::size_t iterations = 0;
    std::vector<double> inertia_history;  // after each assignment step
};

struct KMeansOptions {
    std::size_t max_iter = 300;
    double tol = 1e-4;  // stop once no centroid moves farther than this
};

/// Lloyd's algorithm from k-means++ seeding, single restart.
/// A cluster that empties is re-seeded at the point farthest from its
/// nearest centroid.
KMeansResult kmeans(const Matrix& points, std::size_t clusters, Rng& rng, const KMeansOptions& options = {});

/// Row-wise argmax; ties go to the lower index.
std::vector<int> hard_labels(const Matrix& q);

}  // namespace scgc
