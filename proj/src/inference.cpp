#include "scgc/inference.hpp"

#include "scgc/clustering.hpp"
#include "scgc/losses.hpp"

#include <stdexcept>

namespace scgc {

EvaluationResult evaluate(const ClusteringModel& model, const Matrix& x, std::optional<std::span<const int>> truth) {
    EvaluationResult out;
    out.embeddings = encode(model.network, x);
    out.q = soft_assign(out.embeddings, model.centroids, model.eta);
    out.labels = hard_labels(out.q);
    if (truth) {
        if (truth->size() != x.rows()) {
            throw std::invalid_argument("evaluate: " + std::to_string(truth->size()) + " labels for " +
                                        std::to_string(x.rows()) + " rows");
        }
        out.report = clustering_metrics(out.labels, *truth);
    }
    return out;
}

}  // namespace scgc
