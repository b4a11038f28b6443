#include "scgc/pipeline.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace scgc {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, bool full_batch,
                                                    Rng& rng) {
    if (full_batch || batch_size >= n) {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return {std::move(all)};
    }
    const auto order = sample_batch(n, n, rng);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

double max_row_sum_error(const Matrix& m) {
    double worst = 0.0;
    for (double s : row_sums(m)) worst = std::max(worst, std::abs(s - 1.0));
    return worst;
}

}  // namespace

std::vector<std::size_t> sample_batch(std::size_t n, std::size_t batch_size, Rng& rng) {
    if (batch_size > n) {
        throw std::invalid_argument("sample_batch: batch size " + std::to_string(batch_size) + " exceeds " +
                                    std::to_string(n) + " nodes");
    }
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // Partial Fisher-Yates: the first batch_size slots are a uniform sample.
    for (std::size_t i = 0; i < batch_size; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(batch_size);
    return pool;
}

PretrainResult pretrain(const Matrix& x, const TrainConfig& config, std::ostream* log) {
    config.validate();
    if (!all_finite(x)) throw std::invalid_argument("pretrain: features contain non-finite values");
    if (x.rows() < config.cluster_count) throw std::invalid_argument("pretrain: fewer rows than clusters");

    PretrainResult result;
    Rng init_rng(config.seed, streams::kInit);
    const auto hidden = config.hidden_dims();
    result.network = init_autoencoder(x.cols(), hidden, config.embed_dim(), true, init_rng);
    result.network.init_seed = config.seed;

    auto optimizer = make_adam(config.lr_pretrain);
    Rng batch_rng(config.seed, streams::kPretrainBatches);
    for (std::size_t epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
        const auto batches = epoch_batches(x.rows(), config.batch_size, false, batch_rng);
        double weighted = 0.0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const Matrix xb = gather_rows(x, batches[b]);
            const auto cache = forward(result.network, xb, true);
            const auto recon = reconstruction_loss_grad(xb, cache.reconstruction(), config.reconstruction);
            if (!std::isfinite(recon.value)) {
                throw std::runtime_error("pretrain diverged: non-finite reconstruction loss at epoch " +
                                         std::to_string(epoch + 1) + ", batch " + std::to_string(b + 1));
            }
            const auto grads = backward(result.network, cache, Matrix{}, recon.grad);
            const auto blocks = param_blocks(result.network, grads);
            adam_step(optimizer, blocks);
            weighted += recon.value * static_cast<double>(xb.rows());
        }
        result.reconstruction_history.push_back(weighted / static_cast<double>(x.rows()));
        if (log) *log << "pretrain epoch " << epoch + 1 << " recon " << result.reconstruction_history.back() << '\n';
    }

    const Matrix z = encode(result.network, x);
    Rng kmeans_rng(config.seed, streams::kKMeans);
    result.kmeans = kmeans(z, config.cluster_count, kmeans_rng, {config.kmeans_max_iter, config.kmeans_tol});
    result.centroids = result.kmeans.centroids;
    return result;
}

InfluenceMatrix influence_for(const SparseGraph& graph, Variant variant, std::size_t hops) {
    const Matrix a_hat = normalize_adjacency(graph);
    return variant == Variant::Scgc ? single_power_influence(a_hat, hops) : cumulative_influence(a_hat, hops);
}

std::string to_json(const EpochRecord& r) {
    nlohmann::json j{{"epoch", r.epoch},
                     {"contrastive", r.loss.contrastive},
                     {"cluster", r.loss.cluster},
                     {"reconstruction", r.loss.reconstruction},
                     {"total", r.loss.total},
                     {"min_step_cluster", r.min_step_cluster},
                     {"q_row_sum_error", r.q_row_sum_error},
                     {"p_row_sum_error", r.p_row_sum_error},
                     {"seconds", r.seconds},
                     {"steps", r.steps},
                     {"skipped_batches", r.skipped_batches}};
    if (r.metrics) {
        j["acc"] = r.metrics->acc;
        j["nmi"] = r.metrics->nmi;
        j["ari"] = r.metrics->ari;
        j["f1"] = r.metrics->f1;
    }
    return j.dump();
}

TrainResult train(const Matrix& x, const SparseGraph& graph, const TrainConfig& config,
                  const AutoencoderParams& pretrained, const Matrix& centroids,
                  std::optional<std::span<const int>> labels, std::ostream* log) {
    config.validate();
    const std::size_t n = x.rows();
    if (graph.node_count() != n) {
        throw std::invalid_argument("train: graph has " + std::to_string(graph.node_count()) + " nodes but " +
                                    std::to_string(n) + " feature rows");
    }
    if (centroids.rows() != config.cluster_count || centroids.cols() != pretrained.embed_dim()) {
        throw std::invalid_argument("train: centroids " + centroids.shape_string() +
                                    " do not match cluster count and embedding width");
    }
    if (labels && labels->size() != n) throw std::invalid_argument("train: label count does not match rows");
    const bool with_decoder = config.variant == Variant::Scgc;
    if (with_decoder && !pretrained.has_decoder()) {
        throw std::invalid_argument("train: scgc needs a decoder but the pretrained network is encoder-only");
    }

    const InfluenceMatrix influence = influence_for(graph, config.variant, config.hops);

    TrainResult result;
    auto& model = result.model;
    model.network = with_decoder ? pretrained : encoder_only(pretrained);
    model.centroids = centroids;
    model.eta = config.eta;

    const auto weights = config.loss_weights();
    const auto options = config.loss_options();
    auto optimizer = make_adam(config.lr_train);
    Rng batch_rng(config.seed, streams::kTrainBatches);

    Matrix q = soft_assign(encode(model.network, x), model.centroids, model.eta);
    for (std::size_t epoch = 0; epoch < config.train_epochs; ++epoch) {
        const auto started = Clock::now();
        const Matrix p = target_distribution(q);

        EpochRecord record;
        record.epoch = epoch + 1;
        record.p_row_sum_error = max_row_sum_error(p);
        record.min_step_cluster = std::numeric_limits<double>::infinity();
        std::size_t covered = 0;

        const auto batches = epoch_batches(n, config.batch_size, config.full_batch, batch_rng);
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const auto& idx = batches[b];
            if (idx.size() < 2) {
                ++record.skipped_batches;
                if (log) *log << "warning: epoch " << epoch + 1 << " skips a batch of " << idx.size() << " node\n";
                continue;
            }
            const Matrix xb = gather_rows(x, idx);
            const auto cache = forward(model.network, xb, with_decoder);
            const Matrix gamma = gather_block(influence.gamma, idx);
            const Matrix pb = gather_rows(p, idx);
            const BatchTerms terms{xb,          cache.embeddings(), with_decoder ? &cache.reconstruction() : nullptr,
                                   gamma,       pb,                 model.centroids,
                                   model.eta};
            const auto loss = total_loss(terms, weights, options);
            if (!std::isfinite(loss.terms.total)) {
                throw std::runtime_error("train diverged at epoch " + std::to_string(epoch + 1) + ", batch " +
                                         std::to_string(b + 1) + ": contrastive=" +
                                         std::to_string(loss.terms.contrastive) +
                                         " cluster=" + std::to_string(loss.terms.cluster) +
                                         " recon=" + std::to_string(loss.terms.reconstruction));
            }

            const auto grads = backward(model.network, cache, loss.grad_z, loss.grad_x_hat);
            auto blocks = param_blocks(model.network, grads);
            blocks.push_back({"centroids", model.centroids.values(), loss.grad_centroids.values()});
            adam_step(optimizer, blocks);

            const double share = static_cast<double>(idx.size());
            record.loss.contrastive += share * loss.terms.contrastive;
            record.loss.cluster += share * loss.terms.cluster;
            record.loss.reconstruction += share * loss.terms.reconstruction;
            record.loss.total += share * loss.terms.total;
            record.min_step_cluster = std::min(record.min_step_cluster, loss.terms.cluster);
            covered += idx.size();
            ++record.steps;
        }
        if (covered > 0) {
            const double inv = 1.0 / static_cast<double>(covered);
            record.loss.contrastive *= inv;
            record.loss.cluster *= inv;
            record.loss.reconstruction *= inv;
            record.loss.total *= inv;
        }

        q = soft_assign(encode(model.network, x), model.centroids, model.eta);
        record.q_row_sum_error = max_row_sum_error(q);
        if (labels) record.metrics = clustering_metrics(hard_labels(q), *labels);
        record.seconds = std::chrono::duration<double>(Clock::now() - started).count();
        if (log) *log << "train " << to_json(record) << '\n';
        result.history.epochs.push_back(std::move(record));
    }
    return result;
}

RunResult run_pipeline(const Matrix& x, const SparseGraph& graph, const TrainConfig& config,
                       std::optional<std::span<const int>> labels, std::ostream* log) {
    RunResult run;
    run.pretrained = pretrain(x, config, log);
    run.trained = train(x, graph, config, run.pretrained.network, run.pretrained.centroids, labels, log);
    run.evaluation = evaluate(run.trained.model, x, labels);
    return run;
}

}  // namespace scgc
