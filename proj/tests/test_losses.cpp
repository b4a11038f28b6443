#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "scgc/graph.hpp"
#include "scgc/losses.hpp"

#include <cmath>

using namespace scgc;

namespace {

Matrix row_stochastic(std::size_t n, std::size_t c, Rng& rng) {
    Matrix m = oracle::random_matrix(n, c, rng, 0.05, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (double v : m.row(i)) s += v;
        for (double& v : m.row(i)) v /= s;
    }
    return m;
}

Matrix permute(const Matrix& m, const std::vector<std::size_t>& perm, bool both_axes) {
    return both_axes ? gather_block(m, perm) : gather_rows(m, perm);
}

}  // namespace

TEST_CASE("reconstruction loss examples") {
    const Matrix x = Matrix::from_rows({{1, 2}, {3, 4}});
    CHECK(reconstruction_loss(x, x) == 0.0);
    CHECK(reconstruction_loss(Matrix::from_rows({{1, 0}}), Matrix::from_rows({{0, 0}})) == 1.0);
    Rng rng(1);
    const Matrix a = oracle::random_matrix(6, 4, rng);
    const Matrix b = oracle::random_matrix(6, 4, rng);
    CHECK(std::abs(reconstruction_loss(a, b) - oracle::reconstruction(a, b)) <= 1e-12);
    CHECK(std::abs(reconstruction_loss(a, b, Reduction::Sum) - 6.0 * oracle::reconstruction(a, b)) <= 1e-12);
    CHECK_THROWS_AS(reconstruction_loss(a, Matrix(6, 3)), std::invalid_argument);
}

TEST_CASE("cosine similarity examples") {
    const Matrix same = Matrix::from_rows({{1, 2}, {1, 2}, {1, 2}});
    const Matrix s_same = pairwise_similarity(same).s;
    for (double v : s_same.values()) CHECK(std::abs(v - 1.0) <= 1e-15);
    const Matrix ortho = Matrix::from_rows({{1, 0}, {0, 1}});
    CHECK(pairwise_similarity(ortho).s(0, 1) == 0.0);
}

TEST_CASE("cosine similarity matches the per-pair oracle") {
    Rng rng(2);
    const Matrix z = oracle::random_matrix(10, 4, rng);
    const auto r = pairwise_similarity(z);
    CHECK(r.zero_norm_rows == 0);
    CHECK(is_symmetric(r.s, 0.0));
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(std::abs(r.s(i, i) - 1.0) <= 1e-12);
        for (std::size_t j = 0; j < 10; ++j) CHECK(std::abs(r.s(i, j) - oracle::cosine(z.row(i), z.row(j))) <= 1e-12);
    }
}

TEST_CASE("zero-norm rows have zero similarity and are counted") {
    const Matrix z = Matrix::from_rows({{0, 0}, {1, 1}, {0, 0}});
    const auto r = pairwise_similarity(z);
    CHECK(r.zero_norm_rows == 2);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(r.s(0, j) == 0.0);
        CHECK(r.s(j, 2) == 0.0);
    }
    CHECK(r.s(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("contrastive loss hand cases") {
    SUBCASE("two nodes with unit influence") {
        Rng rng(3);
        const Matrix z = oracle::random_matrix(2, 3, rng);
        const Matrix gamma = Matrix::from_rows({{0, 1}, {1, 0}});
        CHECK(std::abs(contrastive_loss(z, gamma, 0.5)) < 1e-6);
    }
    SUBCASE("equal similarities and equal influence give -log gamma") {
        const Matrix z = Matrix::from_rows({{1, 1}, {2, 2}, {3, 3}, {0.5, 0.5}});
        Matrix gamma(4, 4, 0.3);
        CHECK(std::abs(contrastive_loss(z, gamma, 0.25) + std::log(0.3)) < 1e-6);
    }
    SUBCASE("isolated node stays finite") {
        Rng rng(4);
        const Matrix z = oracle::random_matrix(3, 2, rng);
        Matrix gamma = Matrix::from_rows({{0.5, 0, 0}, {0, 0.5, 0.5}, {0, 0.5, 0.5}});
        const double loss = contrastive_loss(z, gamma, 0.25);
        CHECK(std::isfinite(loss));
        const double s01 = std::exp(oracle::cosine(z.row(0), z.row(1)) / 0.25);
        const double s02 = std::exp(oracle::cosine(z.row(0), z.row(2)) / 0.25);
        const double row0 = -std::log(1e-8 / (1e-8 + s01 + s02));
        CHECK(row0 > 15.0);
        CHECK(std::abs(loss - oracle::contrastive(z, gamma, 0.25)) <= 1e-10);
    }
}

TEST_CASE("contrastive loss matches the literal formula") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(12);
        const Matrix z = oracle::random_matrix(n, 3, rng);
        const auto g = oracle::random_graph(n, 0.3, rng);
        const Matrix gamma = cumulative_influence(normalize_adjacency(g), 1 + rng.uniform_index(3)).gamma;
        const double tau = rng.uniform(0.25, 2.0);
        CHECK(std::abs(contrastive_loss(z, gamma, tau) - oracle::contrastive(z, gamma, tau)) <= 1e-10);
        CHECK(std::abs(contrastive_loss(z, gamma, tau, Similarity::Dot) - oracle::contrastive(z, gamma, tau, false)) <=
              1e-10);
    }
}

TEST_CASE("contrastive loss survives tiny temperatures") {
    Rng rng(6);
    const Matrix z = oracle::random_matrix(6, 3, rng, -5, 5);
    Matrix gamma(6, 6, 0.2);
    CHECK(std::isfinite(contrastive_loss(z, gamma, 1e-3)));
    CHECK(std::isfinite(contrastive_loss(z, gamma, 1e-3, Similarity::Dot)));
    CHECK(all_finite(contrastive_loss_grad(z, gamma, 1e-3, Similarity::Dot).grad));
}

TEST_CASE("contrastive loss rejects bad inputs") {
    const Matrix z1(1, 2, 1.0);
    CHECK_THROWS_AS(contrastive_loss(z1, Matrix(1, 1), 1.0), std::invalid_argument);
    const Matrix z = Matrix::from_rows({{1, 0}, {0, 1}});
    CHECK_THROWS_AS(contrastive_loss(z, Matrix(3, 3), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(contrastive_loss(z, Matrix(2, 2), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(contrastive_loss(z, Matrix(2, 2, -1.0), 1.0), std::invalid_argument);
}

TEST_CASE("contrastive loss is invariant to a joint permutation") {
    Rng rng(7);
    const Matrix z = oracle::random_matrix(9, 3, rng);
    const Matrix gamma = cumulative_influence(normalize_adjacency(oracle::random_graph(9, 0.4, rng)), 2).gamma;
    const auto perm = random_permutation(9, rng);
    const double base = contrastive_loss(z, gamma, 0.5);
    CHECK(std::abs(contrastive_loss(permute(z, perm, false), permute(gamma, perm, true), 0.5) - base) <= 1e-12);
}

TEST_CASE("raising a positive pair's similarity lowers the loss") {
    // Node 1 is node 0's only positive. z_1 rotates toward z_0 in the xy plane
    // while nodes 2 and 3 sit on the z axis, so only s_01 changes.
    Matrix gamma(4, 4);
    gamma(0, 1) = gamma(1, 0) = 1.0;
    gamma(2, 3) = gamma(3, 2) = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double angle = 3.0; angle >= 0.0; angle -= 0.5) {
        const Matrix z = Matrix::from_rows({{1, 0, 0}, {std::cos(angle), std::sin(angle), 0}, {0, 0, 1}, {0, 0, -1}});
        const double loss = contrastive_loss(z, gamma, 0.5);
        CHECK(loss < prev);
        prev = loss;
    }
}

TEST_CASE("soft assignment examples") {
    SUBCASE("equidistant point is uniform") {
        const Matrix mu = Matrix::from_rows({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
        const Matrix q = soft_assign(Matrix::from_rows({{0, 0}}), mu, 1.0);
        for (double v : q.values()) CHECK(std::abs(v - 0.25) <= 1e-15);
    }
    SUBCASE("kernel values 1 and 1/2") {
        const Matrix q = soft_assign(Matrix::from_rows({{0, 0}}), Matrix::from_rows({{0, 0}, {1, 0}}), 1.0);
        CHECK(std::abs(q(0, 0) - 2.0 / 3.0) <= 1e-15);
        CHECK(std::abs(q(0, 1) - 1.0 / 3.0) <= 1e-15);
    }
    SUBCASE("random instance against the per-entry formula") {
        Rng rng(8);
        const Matrix z = oracle::random_matrix(12, 3, rng, -2, 2);
        const Matrix mu = oracle::random_matrix(4, 3, rng, -2, 2);
        for (double eta : {0.5, 1.0, 3.0}) {
            const Matrix q = soft_assign(z, mu, eta);
            CHECK(max_abs_diff(q, oracle::soft_assign(z, mu, eta)) <= 1e-12);
            for (double s : row_sums(q)) CHECK(std::abs(s - 1.0) <= 1e-12);
            for (double v : q.values()) CHECK(v > 0.0);
        }
    }
}

TEST_CASE("target distribution examples") {
    CHECK(target_distribution(Matrix::from_rows({{0, 1, 0}})) == Matrix::from_rows({{0, 1, 0}}));
    const Matrix uniform(5, 4, 0.25);
    CHECK(max_abs_diff(target_distribution(uniform), uniform) <= 1e-15);

    const Matrix q = Matrix::from_rows({{0.8, 0.2}, {0.6, 0.4}});
    const Matrix p = target_distribution(q);
    // f = (1.4, 0.6); row 0: (0.64/1.4, 0.04/0.6) normalized = (48/55, 7/55).
    CHECK(std::abs(p(0, 0) - 48.0 / 55.0) <= 1e-12);
    CHECK(std::abs(p(0, 1) - 7.0 / 55.0) <= 1e-12);
    CHECK(std::abs(p(1, 0) - 27.0 / 55.0) <= 1e-12);
    CHECK(std::abs(p(1, 1) - 28.0 / 55.0) <= 1e-12);
    CHECK(std::abs(p(0, 0) - 0.8727) < 1e-4);
    CHECK(std::abs(p(1, 1) - 0.5091) < 1e-4);
    CHECK(max_abs_diff(p, oracle::target(q)) <= 1e-12);
}

TEST_CASE("target distribution of a single row is the row itself") {
    // With one row the frequency f_u equals q_u, so p_u is proportional to q_u.
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix q = row_stochastic(1, 2 + rng.uniform_index(5), rng);
        const Matrix p = target_distribution(q);
        CHECK(max_abs_diff(p, q) <= 1e-12);
        CHECK(std::abs(row_sums(p)[0] - 1.0) <= 1e-12);
    }
}

TEST_CASE("target distribution sharpens rows when cluster frequencies balance") {
    Rng rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        // Rows are cyclic shifts of one another, so every column sums alike.
        const std::size_t c = 2 + rng.uniform_index(4);
        const Matrix base = row_stochastic(1, c, rng);
        Matrix q(c, c);
        for (std::size_t i = 0; i < c; ++i)
            for (std::size_t u = 0; u < c; ++u) q(i, u) = base(0, (u + i) % c);
        const Matrix p = target_distribution(q);
        for (std::size_t i = 0; i < c; ++i) {
            double qmax = 0.0, pmax = 0.0;
            for (std::size_t u = 0; u < c; ++u) {
                qmax = std::max(qmax, q(i, u));
                pmax = std::max(pmax, p(i, u));
            }
            CHECK(pmax > qmax);
        }
    }
}

TEST_CASE("kl cluster loss examples") {
    Rng rng(10);
    const Matrix q = row_stochastic(6, 3, rng);
    CHECK(kl_cluster_loss(q, q) == 0.0);
    CHECK(std::abs(kl_cluster_loss(Matrix::from_rows({{1, 0}}), Matrix::from_rows({{0.5, 0.5}})) - std::log(2.0)) <=
          1e-15);
    CHECK_THROWS_AS(kl_cluster_loss(Matrix::from_rows({{0.5, 0.5}}), Matrix::from_rows({{1, 0}})), std::domain_error);
    CHECK_THROWS_AS(kl_cluster_loss(q, Matrix(6, 2)), std::invalid_argument);
}

TEST_CASE("kl cluster loss is non-negative and matches the per-entry sum") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(10);
        const Matrix p = row_stochastic(n, 3, rng);
        const Matrix q = row_stochastic(n, 3, rng);
        const double kl = kl_cluster_loss(p, q);
        CHECK(kl >= 0.0);
        CHECK(std::abs(kl - oracle::kl(p, q)) <= 1e-12);
        CHECK(std::abs(kl_cluster_loss(p, q, Reduction::Mean) - kl / static_cast<double>(n)) <= 1e-12);
        CHECK(std::abs(kl_cluster_loss(p, p)) <= 1e-9);
    }
}

TEST_CASE("cluster_loss_grad value agrees with kl on the soft assignment") {
    Rng rng(12);
    const Matrix z = oracle::random_matrix(7, 3, rng);
    const Matrix mu = oracle::random_matrix(3, 3, rng);
    const Matrix p = oracle::target(oracle::soft_assign(z, mu, 1.0));
    const auto r = cluster_loss_grad(z, mu, p, 1.0, Reduction::Sum);
    CHECK(std::abs(r.value - oracle::kl(p, oracle::soft_assign(z, mu, 1.0))) <= 1e-12);
    CHECK(max_abs_diff(r.q, oracle::soft_assign(z, mu, 1.0)) <= 1e-12);
}

namespace {

struct Toy {
    Matrix x, z, x_hat, gamma, p, mu;
};

Toy toy(Rng& rng) {
    Toy t;
    t.x = oracle::random_matrix(8, 4, rng);
    t.z = oracle::random_matrix(8, 3, rng);
    t.x_hat = oracle::random_matrix(8, 4, rng);
    t.gamma = single_power_influence(normalize_adjacency(oracle::random_graph(8, 0.4, rng)), 2).gamma;
    t.mu = oracle::random_matrix(3, 3, rng);
    t.p = oracle::target(oracle::soft_assign(t.z, t.mu, 1.0));
    return t;
}

}  // namespace

TEST_CASE("total loss equals the sum of independently computed components") {
    Rng rng(13);
    const Toy t = toy(rng);
    const LossWeights w{0.7, 1.3, 0.5, Variant::Scgc};
    const BatchTerms b{t.x, t.z, &t.x_hat, t.gamma, t.p, t.mu, 1.0};
    const auto r = total_loss(b, w);
    const double nc = oracle::contrastive(t.z, t.gamma, 0.5);
    const double kl = oracle::kl(t.p, oracle::soft_assign(t.z, t.mu, 1.0)) / 8.0;
    const double rec = oracle::reconstruction(t.x, t.x_hat);
    CHECK(std::abs(r.terms.contrastive - nc) <= 1e-12);
    CHECK(std::abs(r.terms.cluster - kl) <= 1e-12);
    CHECK(std::abs(r.terms.reconstruction - rec) <= 1e-12);
    CHECK(std::abs(r.terms.total - (0.7 * nc + 1.3 * kl + rec)) <= 1e-12);

    LossWeights star = w;
    star.variant = Variant::ScgcStar;
    const BatchTerms bs{t.x, t.z, nullptr, t.gamma, t.p, t.mu, 1.0};
    const auto rs = total_loss(bs, star);
    CHECK(rs.terms.reconstruction == 0.0);
    CHECK(rs.grad_x_hat.empty());
    CHECK(std::abs(rs.terms.total - (0.7 * nc + 1.3 * kl)) <= 1e-12);
}

TEST_CASE("scgc total approaches reconstruction as alpha and beta vanish") {
    Rng rng(14);
    const Toy t = toy(rng);
    const BatchTerms b{t.x, t.z, &t.x_hat, t.gamma, t.p, t.mu, 1.0};
    const double rec = oracle::reconstruction(t.x, t.x_hat);
    double prev_gap = std::numeric_limits<double>::infinity();
    for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const auto r = total_loss(b, {eps, eps, 0.5, Variant::Scgc});
        const double gap = std::abs(r.terms.total - rec);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 1e-6);
}

TEST_CASE("at depth one the influence and neighbour contrasts coincide") {
    Rng rng(15);
    const Toy t = toy(rng);
    const Matrix a_hat = normalize_adjacency(oracle::random_graph(8, 0.4, rng));
    const Matrix cum = cumulative_influence(a_hat, 1).gamma;
    const Matrix single = single_power_influence(a_hat, 1).gamma;
    const auto scgc = total_loss({t.x, t.z, &t.x_hat, single, t.p, t.mu, 1.0}, {1, 0.1, 0.5, Variant::Scgc});
    const auto star = total_loss({t.x, t.z, nullptr, cum, t.p, t.mu, 1.0}, {1, 0.1, 0.5, Variant::ScgcStar});
    CHECK(std::abs(scgc.terms.contrastive - star.terms.contrastive) <= 1e-12);
}

TEST_CASE("total loss rejects variant and input mismatches") {
    Rng rng(16);
    const Toy t = toy(rng);
    CHECK_THROWS_AS(total_loss({t.x, t.z, nullptr, t.gamma, t.p, t.mu, 1.0}, {1, 1, 1, Variant::Scgc}),
                    std::invalid_argument);
    CHECK_THROWS_AS(total_loss({t.x, t.z, &t.x_hat, t.gamma, t.p, t.mu, 1.0}, {1, 1, 1, Variant::ScgcStar}),
                    std::invalid_argument);
    CHECK_THROWS_AS(total_loss({t.x, t.z, &t.x_hat, t.gamma, t.p, t.mu, 1.0}, {0, 1, 1, Variant::Scgc}),
                    std::invalid_argument);
}

TEST_CASE("enum names round trip") {
    CHECK(variant_from_string("scgc") == Variant::Scgc);
    CHECK(variant_from_string("scgc-star") == Variant::ScgcStar);
    CHECK(variant_from_string(to_string(Variant::ScgcStar)) == Variant::ScgcStar);
    CHECK(similarity_from_string(to_string(Similarity::Dot)) == Similarity::Dot);
    CHECK(reduction_from_string(to_string(Reduction::Sum)) == Reduction::Sum);
    CHECK_THROWS_AS(variant_from_string("dec"), std::invalid_argument);
}
