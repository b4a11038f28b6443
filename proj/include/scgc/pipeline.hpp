#pragma once

#include "scgc/clustering.hpp"
#include "scgc/config.hpp"
#include "scgc/graph.hpp"
#include "scgc/inference.hpp"
#include "scgc/losses.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scgc {

// Independent random streams derived from TrainConfig::seed.
namespace streams {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kPretrainBatches = 2;
inline constexpr std::uint64_t kKMeans = 3;
inline constexpr std::uint64_t kTrainBatches = 4;
}  // namespace streams

/// `batch_size` distinct indices drawn uniformly from 0..n-1.
std::vector<std::size_t> sample_batch(std::size_t n, std::size_t batch_size, Rng& rng);

struct PretrainResult {
    AutoencoderParams network;
    Matrix centroids;
    KMeansResult kmeans;
    std::vector<double> reconstruction_history;  // mean batch loss per epoch
};

/// Reconstruction-only autoencoder training, then k-means on the embeddings.
PretrainResult pretrain(const Matrix& x, const TrainConfig& config, std::ostream* log = nullptr);

struct EpochRecord {
    std::size_t epoch = 0;
    LossBreakdown loss;               // batch-size weighted means over the epoch
    double min_step_cluster = 0.0;    // smallest per-step KL seen this epoch
    double q_row_sum_error = 0.0;     // max |row sum - 1| of Q after the epoch
    double p_row_sum_error = 0.0;     // same for the P used during the epoch
    double seconds = 0.0;
    std::size_t steps = 0;
    std::size_t skipped_batches = 0;
    std::optional<MetricReport> metrics;
};

struct RunHistory {
    std::vector<EpochRecord> epochs;
};

std::string to_json(const EpochRecord& record);

struct TrainResult {
    ClusteringModel model;
    RunHistory history;
};

/// Joint self-supervised training. The influence matrix is built once from
/// `graph` before the first epoch. P is refreshed from the full-data Q at
/// the start of every epoch; centroids are trained alongside the network.
TrainResult train(const Matrix& x, const SparseGraph& graph, const TrainConfig& config,
                  const AutoencoderParams& pretrained, const Matrix& centroids,
                  std::optional<std::span<const int>> labels = std::nullopt, std::ostream* log = nullptr);

/// Influence used by a variant: single power for scgc, cumulative for scgc-star.
InfluenceMatrix influence_for(const SparseGraph& graph, Variant variant, std::size_t hops);

struct RunResult {
    PretrainResult pretrained;
    TrainResult trained;
    EvaluationResult evaluation;
};

/// pretrain -> train -> evaluate.
RunResult run_pipeline(const Matrix& x, const SparseGraph& graph, const TrainConfig& config,
                       std::optional<std::span<const int>> labels = std::nullopt, std::ostream* log = nullptr);

}  // namespace scgc
