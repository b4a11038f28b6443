#pragma once

#include "scgc/losses.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace scgc {

/// Every knob of a pretrain + train run. Defaults are the standard
/// training protocol (30 pretraining epochs, 200 training epochs, batch 256,
/// eta = 1, 500-500-2000-10 autoencoder).
struct TrainConfig {
    std::string name;
    Variant variant = Variant::ScgcStar;
    double alpha = 1.0;
    double beta = 0.1;
    double tau = 0.25;
    std::size_t hops = 1;
    double eta = 1.0;
    double lr_pretrain = 1e-3;
    double lr_train = 1e-3;
    std::size_t pretrain_epochs = 30;
    std::size_t train_epochs = 200;
    std::size_t batch_size = 256;
    bool full_batch = true;
    std::uint64_t seed = 0;
    std::size_t cluster_count = 2;
    /// Hidden widths followed by the embedding width.
    std::vector<std::size_t> ae_dims{500, 500, 2000, 10};
    Similarity similarity = Similarity::Cosine;
    Reduction reconstruction = Reduction::Mean;
    Reduction cluster_reduction = Reduction::Mean;
    std::size_t kmeans_max_iter = 300;
    double kmeans_tol = 1e-4;

    void validate() const;

    LossWeights loss_weights() const { return {alpha, beta, tau, variant}; }
    LossOptions loss_options() const { return {similarity, reconstruction, cluster_reduction}; }
    std::vector<std::size_t> hidden_dims() const { return {ae_dims.begin(), ae_dims.end() - 1}; }
    std::size_t embed_dim() const { return ae_dims.back(); }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

std::string config_to_json(const TrainConfig& config);
/// Keys absent from the JSON keep their current value in `base`; unknown
/// keys are rejected. "K" is accepted as an alias for "hops".
TrainConfig config_from_json(const std::string& text, TrainConfig base = {});

}  // namespace scgc
