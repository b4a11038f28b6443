#pragma once

#include "scgc/matrix.hpp"

#include <cstddef>
#include <string>

namespace scgc {

enum class Variant {
    Scgc,      ///< reconstruction + single-power neighbour contrast + cluster KL
    ScgcStar,  ///< encoder-only, cumulative influence contrast + cluster KL
};

const char* to_string(Variant v);
Variant variant_from_string(const std::string& name);

enum class Similarity { Cosine, Dot };

const char* to_string(Similarity s);
Similarity similarity_from_string(const std::string& name);

enum class Reduction { Sum, Mean };

const char* to_string(Reduction r);
Reduction reduction_from_string(const std::string& name);

struct LossWeights {
    double alpha = 1.0;
    double beta = 0.1;
    double tau = 0.25;
    Variant variant = Variant::ScgcStar;

    /// Throws unless alpha, beta and tau are all strictly positive.
    void validate() const;
};

struct LossOptions {
    Similarity similarity = Similarity::Cosine;
    Reduction reconstruction = Reduction::Mean;
    Reduction cluster = Reduction::Mean;
};

/// Guard added inside the numerator log of the contrastive loss.
inline constexpr double kNumeratorGuard = 1e-8;
/// Guard in the contrastive denominator.
inline constexpr double kDenominatorGuard = 1e-8;

struct ValueAndGrad {
    double value = 0.0;
    Matrix grad;
};

/// ||X - X_hat||_F^2, divided by the row count under Reduction::Mean.
double reconstruction_loss(const Matrix& x, const Matrix& x_hat, Reduction reduction = Reduction::Mean);
/// Value and dL/dX_hat.
ValueAndGrad reconstruction_loss_grad(const Matrix& x, const Matrix& x_hat, Reduction reduction = Reduction::Mean);

struct SimilarityResult {
    Matrix s;
    std::size_t zero_norm_rows = 0;
};

/// Cosine similarity between all row pairs. A zero-norm row has similarity 0
/// to everything (its diagonal included) and is counted in zero_norm_rows.
SimilarityResult pairwise_similarity(const Matrix& z, Similarity kind = Similarity::Cosine);

/// Mean over the batch of -log[(g + sum_j gamma_ij e^{s_ij/tau}) / (g + sum_k e^{s_ik/tau})],
/// with j, k ranging over every other batch row. gamma is the B x B influence
/// sub-block aligned with the rows of z.
double contrastive_loss(const Matrix& z, const Matrix& gamma, double tau, Similarity kind = Similarity::Cosine);
/// Value and dL/dZ.
ValueAndGrad contrastive_loss_grad(const Matrix& z, const Matrix& gamma, double tau,
                                   Similarity kind = Similarity::Cosine);

/// Student-t soft assignment of each embedding to each centroid.
Matrix soft_assign(const Matrix& z, const Matrix& centroids, double eta);

/// Sharpened target: q^2 / cluster frequency, renormalized per row.
Matrix target_distribution(const Matrix& q);

/// KL(P || Q) summed over all entries (or averaged over rows under Mean).
double kl_cluster_loss(const Matrix& p, const Matrix& q, Reduction reduction = Reduction::Sum);

struct ClusterLossGrad {
    double value = 0.0;
    Matrix q;
    Matrix grad_z;
    Matrix grad_centroids;
};

/// KL(P || Q(z, centroids)) with P held fixed, and its gradients.
ClusterLossGrad cluster_loss_grad(const Matrix& z, const Matrix& centroids, const Matrix& p, double eta,
                                  Reduction reduction = Reduction::Mean);

/// Everything one optimization step needs for a batch of B nodes.
struct BatchTerms {
    const Matrix& x;          // B x d raw features
    const Matrix& z;          // B x e embeddings
    const Matrix* x_hat;      // B x d reconstruction; required for Variant::Scgc only
    const Matrix& gamma;      // B x B influence block
    const Matrix& p;          // B x C target rows
    const Matrix& centroids;  // C x e
    double eta = 1.0;
};

struct LossBreakdown {
    double contrastive = 0.0;
    double cluster = 0.0;
    double reconstruction = 0.0;
    double total = 0.0;
};

struct TotalLossResult {
    LossBreakdown terms;
    Matrix grad_z;
    Matrix grad_x_hat;  // empty for Variant::ScgcStar
    Matrix grad_centroids;
    Matrix q;
};

/// Joint objective:
///   scgc:      alpha * contrastive + beta * cluster + reconstruction
///   scgc-star: alpha * contrastive + beta * cluster
TotalLossResult total_loss(const BatchTerms& batch, const LossWeights& weights, const LossOptions& options = {});

}  // namespace scgc
