#pragma once

// Graph-free inference. Nothing reachable from this header may depend on
// graph structure: a trained model clusters new feature rows on its own.

#include "scgc/matrix.hpp"
#include "scgc/metrics.hpp"
#include "scgc/model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace scgc {

/// Network weights plus the cluster centres used by the soft assignment.
struct ClusteringModel {
    AutoencoderParams network;
    Matrix centroids;
    double eta = 1.0;

    friend bool operator==(const ClusteringModel&, const ClusteringModel&) = default;
};

struct EvaluationResult {
    Matrix embeddings;
    Matrix q;
    std::vector<int> labels;
    std::optional<MetricReport> report;  // present only when truth labels were given
};

EvaluationResult evaluate(const ClusteringModel& model, const Matrix& x,
                          std::optional<std::span<const int>> truth = std::nullopt);

}  // namespace scgc
