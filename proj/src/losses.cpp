#include "scgc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace scgc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                                    b.shape_string());
    }
}

std::vector<double> row_norms(const Matrix& z) {
    std::vector<double> norms(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double s = 0.0;
        for (double v : z.row(i)) s += v * v;
        norms[i] = std::sqrt(s);
    }
    return norms;
}

void check_contrastive_inputs(const Matrix& z, const Matrix& gamma, double tau) {
    if (z.rows() < 2) throw std::invalid_argument("contrastive_loss: batch needs at least 2 rows");
    if (gamma.rows() != z.rows() || gamma.cols() != z.rows()) {
        throw std::invalid_argument("contrastive_loss: influence block " + gamma.shape_string() +
                                    " does not align with " + std::to_string(z.rows()) + " embeddings");
    }
    if (!(tau > 0.0)) throw std::invalid_argument("contrastive_loss: tau must be positive");
    for (double g : gamma.values())
        if (!(g >= 0.0)) throw std::invalid_argument("contrastive_loss: influence weights must be >= 0");
}

struct ContrastiveRows {
    double value = 0.0;
    Matrix dloss_ds;  // derivative of the batch loss w.r.t. s_ij as seen from row i
};

ContrastiveRows contrastive_rows(const Matrix& s, const Matrix& gamma, double tau) {
    const std::size_t b = s.rows();
    const double log_num_guard = std::log(kNumeratorGuard);
    const double log_den_guard = std::log(kDenominatorGuard);
    ContrastiveRows out{0.0, Matrix(b, b)};
    for (std::size_t i = 0; i < b; ++i) {
        double m = kNegInf;
        for (std::size_t k = 0; k < b; ++k)
            if (k != i) m = std::max(m, s(i, k) / tau);

        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < b; ++k) {
            if (k == i) continue;
            const double e = std::exp(s(i, k) / tau - m);
            num += gamma(i, k) * e;
            den += e;
        }
        const double log_num = log_add_exp(log_num_guard, num > 0.0 ? std::log(num) + m : kNegInf);
        const double log_den = log_add_exp(log_den_guard, std::log(den) + m);
        out.value += log_den - log_num;

        for (std::size_t k = 0; k < b; ++k) {
            if (k == i) continue;
            const double a = s(i, k) / tau;
            out.dloss_ds(i, k) = (std::exp(a - log_den) - gamma(i, k) * std::exp(a - log_num)) / tau;
        }
    }
    const double inv_b = 1.0 / static_cast<double>(b);
    out.value *= inv_b;
    for (double& v : out.dloss_ds.values()) v *= inv_b;
    return out;
}

double student_t_kernel(double sq_dist, double eta) {
    if (eta == 1.0) return 1.0 / (1.0 + sq_dist);
    return std::pow(1.0 + sq_dist / eta, -(eta + 1.0) / 2.0);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double d = a[c] - b[c];
        s += d * d;
    }
    return s;
}

}  // namespace

const char* to_string(Variant v) {
    return v == Variant::Scgc ? "scgc" : "scgc-star";
}

Variant variant_from_string(const std::string& name) {
    if (name == "scgc") return Variant::Scgc;
    if (name == "scgc-star" || name == "scgc*") return Variant::ScgcStar;
    throw std::invalid_argument("unknown variant '" + name + "' (expected scgc or scgc-star)");
}

const char* to_string(Similarity s) {
    return s == Similarity::Cosine ? "cosine" : "dot";
}

Similarity similarity_from_string(const std::string& name) {
    if (name == "cosine") return Similarity::Cosine;
    if (name == "dot") return Similarity::Dot;
    throw std::invalid_argument("unknown similarity '" + name + "' (expected cosine or dot)");
}

const char* to_string(Reduction r) {
    return r == Reduction::Sum ? "sum" : "mean";
}

Reduction reduction_from_string(const std::string& name) {
    if (name == "sum") return Reduction::Sum;
    if (name == "mean") return Reduction::Mean;
    throw std::invalid_argument("unknown reduction '" + name + "' (expected sum or mean)");
}

void LossWeights::validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
}

double reconstruction_loss(const Matrix& x, const Matrix& x_hat, Reduction reduction) {
    require_same_shape(x, x_hat, "reconstruction_loss");
    double s = 0.0;
    auto a = x.values();
    auto b = x_hat.values();
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    if (reduction == Reduction::Mean && x.rows() > 0) s /= static_cast<double>(x.rows());
    return s;
}

ValueAndGrad reconstruction_loss_grad(const Matrix& x, const Matrix& x_hat, Reduction reduction) {
    ValueAndGrad out{reconstruction_loss(x, x_hat, reduction), Matrix(x.rows(), x.cols())};
    const double scale =
        reduction == Reduction::Mean && x.rows() > 0 ? 2.0 / static_cast<double>(x.rows()) : 2.0;
    auto a = x.values();
    auto b = x_hat.values();
    auto g = out.grad.values();
    for (std::size_t k = 0; k < a.size(); ++k) g[k] = scale * (b[k] - a[k]);
    return out;
}

SimilarityResult pairwise_similarity(const Matrix& z, Similarity kind) {
    if (kind == Similarity::Dot) return {matmul_nt(z, z), 0};

    const auto norms = row_norms(z);
    Matrix u = z;
    std::size_t zero_rows = 0;
    for (std::size_t i = 0; i < u.rows(); ++i) {
        if (norms[i] == 0.0) {
            ++zero_rows;
            continue;
        }
        for (double& v : u.row(i)) v /= norms[i];
    }
    Matrix s = matmul_nt(u, u);
    for (std::size_t i = 0; i < s.rows(); ++i)
        if (norms[i] > 0.0) s(i, i) = 1.0;
    return {std::move(s), zero_rows};
}

double contrastive_loss(const Matrix& z, const Matrix& gamma, double tau, Similarity kind) {
    check_contrastive_inputs(z, gamma, tau);
    const auto sim = pairwise_similarity(z, kind);
    return contrastive_rows(sim.s, gamma, tau).value;
}

ValueAndGrad contrastive_loss_grad(const Matrix& z, const Matrix& gamma, double tau, Similarity kind) {
    check_contrastive_inputs(z, gamma, tau);
    const std::size_t b = z.rows();
    const auto sim = pairwise_similarity(z, kind);
    auto rows = contrastive_rows(sim.s, gamma, tau);

    // S is symmetric, so s_ij and s_ji are the same function of Z.
    Matrix sym(b, b);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < b; ++j) sym(i, j) = rows.dloss_ds(i, j) + rows.dloss_ds(j, i);

    if (kind == Similarity::Dot) return {rows.value, matmul(sym, z)};

    const auto norms = row_norms(z);
    Matrix u = z;
    for (std::size_t i = 0; i < b; ++i)
        if (norms[i] > 0.0)
            for (double& v : u.row(i)) v /= norms[i];

    Matrix grad_u = matmul(sym, u);
    Matrix grad(b, z.cols());
    for (std::size_t i = 0; i < b; ++i) {
        if (norms[i] == 0.0) continue;
        auto ui = u.row(i);
        auto gi = grad_u.row(i);
        double radial = 0.0;
        for (std::size_t c = 0; c < ui.size(); ++c) radial += ui[c] * gi[c];
        auto out = grad.row(i);
        for (std::size_t c = 0; c < ui.size(); ++c) out[c] = (gi[c] - radial * ui[c]) / norms[i];
    }
    return {rows.value, std::move(grad)};
}

Matrix soft_assign(const Matrix& z, const Matrix& centroids, double eta) {
    if (centroids.rows() < 2) throw std::invalid_argument("soft_assign: need at least 2 centroids");
    if (centroids.cols() != z.cols()) {
        throw std::invalid_argument("soft_assign: centroids " + centroids.shape_string() +
                                    " do not match embeddings " + z.shape_string());
    }
    if (!(eta > 0.0)) throw std::invalid_argument("soft_assign: eta must be positive");
    Matrix q(z.rows(), centroids.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double total = 0.0;
        for (std::size_t u = 0; u < centroids.rows(); ++u) {
            q(i, u) = student_t_kernel(squared_distance(z.row(i), centroids.row(u)), eta);
            total += q(i, u);
        }
        for (double& v : q.row(i)) v /= total;
    }
    return q;
}

Matrix target_distribution(const Matrix& q) {
    for (double v : q.values())
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("target_distribution: soft assignments must be non-negative and finite");
    const auto freq = column_sums(q);
    Matrix p(q.rows(), q.cols());
    for (std::size_t i = 0; i < q.rows(); ++i) {
        double total = 0.0;
        for (std::size_t u = 0; u < q.cols(); ++u) {
            // A zero entry stays zero, which also covers all-zero columns.
            p(i, u) = q(i, u) > 0.0 ? q(i, u) * q(i, u) / freq[u] : 0.0;
            total += p(i, u);
        }
        if (!(total > 0.0)) throw std::invalid_argument("target_distribution: row " + std::to_string(i) + " is all zero");
        for (double& v : p.row(i)) v /= total;
    }
    return p;
}

double kl_cluster_loss(const Matrix& p, const Matrix& q, Reduction reduction) {
    require_same_shape(p, q, "kl_cluster_loss");
    double total = 0.0;
    auto pv = p.values();
    auto qv = q.values();
    for (std::size_t k = 0; k < pv.size(); ++k) {
        if (pv[k] == 0.0) continue;
        if (!(qv[k] > 0.0)) {
            throw std::domain_error("kl_cluster_loss: q is zero where p is positive (infinite divergence)");
        }
        total += pv[k] * std::log(pv[k] / qv[k]);
    }
    if (reduction == Reduction::Mean && p.rows() > 0) total /= static_cast<double>(p.rows());
    return total;
}

ClusterLossGrad cluster_loss_grad(const Matrix& z, const Matrix& centroids, const Matrix& p, double eta,
                                  Reduction reduction) {
    ClusterLossGrad out;
    out.q = soft_assign(z, centroids, eta);
    require_same_shape(p, out.q, "cluster_loss_grad");
    out.value = kl_cluster_loss(p, out.q, reduction);

    const double scale =
        reduction == Reduction::Mean && z.rows() > 0 ? 1.0 / static_cast<double>(z.rows()) : 1.0;
    const double c = (eta + 1.0) / eta;
    out.grad_z = Matrix(z.rows(), z.cols());
    out.grad_centroids = Matrix(centroids.rows(), centroids.cols());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        auto zi = z.row(i);
        auto gz = out.grad_z.row(i);
        for (std::size_t u = 0; u < centroids.rows(); ++u) {
            auto mu = centroids.row(u);
            const double sq = squared_distance(zi, mu);
            const double w = scale * c * (p(i, u) - out.q(i, u)) / (1.0 + sq / eta);
            auto gm = out.grad_centroids.row(u);
            for (std::size_t k = 0; k < zi.size(); ++k) {
                const double d = w * (zi[k] - mu[k]);
                gz[k] += d;
                gm[k] -= d;
            }
        }
    }
    return out;
}

TotalLossResult total_loss(const BatchTerms& batch, const LossWeights& weights, const LossOptions& options) {
    weights.validate();
    if (weights.variant == Variant::Scgc && batch.x_hat == nullptr) {
        throw std::invalid_argument("total_loss: scgc requires decoder outputs");
    }
    if (weights.variant == Variant::ScgcStar && batch.x_hat != nullptr) {
        throw std::invalid_argument("total_loss: scgc-star is encoder-only and takes no reconstruction");
    }

    TotalLossResult out;
    auto contrastive = contrastive_loss_grad(batch.z, batch.gamma, weights.tau, options.similarity);
    auto cluster = cluster_loss_grad(batch.z, batch.centroids, batch.p, batch.eta, options.cluster);

    out.terms.contrastive = contrastive.value;
    out.terms.cluster = cluster.value;
    out.grad_z = scaled(contrastive.grad, weights.alpha);
    add_in_place(out.grad_z, cluster.grad_z, weights.beta);
    out.grad_centroids = scaled(cluster.grad_centroids, weights.beta);
    out.q = std::move(cluster.q);

    out.terms.total = weights.alpha * out.terms.contrastive + weights.beta * out.terms.cluster;
    if (weights.variant == Variant::Scgc) {
        auto recon = reconstruction_loss_grad(batch.x, *batch.x_hat, options.reconstruction);
        out.terms.reconstruction = recon.value;
        out.terms.total += recon.value;
        out.grad_x_hat = std::move(recon.grad);
    }
    return out;
}

}  // namespace scgc
