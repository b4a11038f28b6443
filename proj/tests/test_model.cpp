#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "scgc/model.hpp"

#include <cmath>

using namespace scgc;

namespace {

std::vector<std::size_t> dims(std::initializer_list<std::size_t> d) {
    return d;
}

}  // namespace

TEST_CASE("full autoencoder mirrors the encoder's weights") {
    Rng rng(1);
    const auto hidden = dims({500, 500, 2000});
    const auto ae = init_autoencoder(334, hidden, 10, true, rng);
    const std::size_t encoder = (334 * 500 + 500) + (500 * 500 + 500) + (500 * 2000 + 2000) + (2000 * 10 + 10);
    CHECK(ae.encoder_parameter_count() == encoder);
    std::size_t enc_weights = 0, dec_weights = 0, dec_bias = 0;
    for (const auto& l : ae.encoder) enc_weights += l.weight.size();
    for (const auto& l : ae.decoder) {
        dec_weights += l.weight.size();
        dec_bias += l.bias.size();
    }
    CHECK(dec_weights == enc_weights);
    // Decoder biases follow the mirrored fan-outs 2000, 500, 500, 334.
    CHECK(dec_bias == 3334);
    CHECK(ae.parameter_count() == encoder + dec_weights + dec_bias);
    CHECK_NOTHROW(ae.validate());
    CHECK(encoder_only(ae).parameter_count() == encoder);
}

TEST_CASE("encoder-only init has no decoder") {
    Rng rng(2);
    const auto hidden = dims({4});
    const auto ae = init_autoencoder(3, hidden, 2, false, rng);
    CHECK(ae.decoder.empty());
    CHECK_FALSE(ae.has_decoder());
    CHECK_THROWS_AS(decode(ae, Matrix(1, 2)), std::invalid_argument);
}

TEST_CASE("init is reproducible and respects the fan-in bound") {
    const auto hidden = dims({7, 5});
    Rng a(3), b(3);
    const auto x = init_autoencoder(6, hidden, 2, true, a);
    const auto y = init_autoencoder(6, hidden, 2, true, b);
    CHECK(x == y);
    for (const auto* layers : {&x.encoder, &x.decoder})
        for (const auto& l : *layers) {
            const double bound = std::sqrt(1.0 / static_cast<double>(l.fan_in()));
            for (double w : l.weight.values()) CHECK(std::abs(w) <= bound);
            for (double v : l.bias) CHECK(v == 0.0);
        }
    CHECK_THROWS_AS(init_autoencoder(0, hidden, 2, true, a), std::invalid_argument);
}

TEST_CASE("zero weights give zero embeddings") {
    Rng rng(4);
    const auto hidden = dims({5, 4});
    auto ae = init_autoencoder(3, hidden, 2, true, rng);
    for (auto* layers : {&ae.encoder, &ae.decoder})
        for (auto& l : *layers) l.weight = Matrix(l.fan_in(), l.fan_out());
    const Matrix x = oracle::random_matrix(6, 3, rng);
    const Matrix z = encode(ae, x);
    const Matrix x_hat = decode(ae, Matrix(6, 2));
    for (double v : z.values()) CHECK(v == 0.0);
    for (double v : x_hat.values()) CHECK(v == 0.0);
}

TEST_CASE("single identity-like layer slices the input") {
    AutoencoderParams ae;
    ae.encoder.push_back({Matrix::from_rows({{1, 0}, {0, 1}, {0, 0}}), {0.0, 0.0}});
    ae.decoder.push_back({Matrix::from_rows({{1, 0, 0}, {0, 1, 0}}), {0.0, 0.0, 0.0}});
    const Matrix x = Matrix::from_rows({{1, -2, 3}, {4, 5, -6}});
    CHECK(encode(ae, x) == Matrix::from_rows({{1, -2}, {4, 5}}));
    CHECK(decode(ae, Matrix::from_rows({{1, -2}})) == Matrix::from_rows({{1, -2, 0}}));
}

TEST_CASE("forward matches the straight-line oracle") {
    Rng rng(5);
    const auto hidden = dims({6, 5});
    auto ae = init_autoencoder(4, hidden, 3, true, rng);
    for (auto* layers : {&ae.encoder, &ae.decoder})
        for (auto& l : *layers)
            for (double& b : l.bias) b = rng.uniform(-0.2, 0.2);
    const Matrix x = oracle::random_matrix(4, 4, rng);
    const Matrix z = encode(ae, x);
    CHECK(max_abs_diff(z, oracle::run_layers(ae.encoder, x)) <= 1e-12);
    CHECK(max_abs_diff(decode(ae, z), oracle::run_layers(ae.decoder, z)) <= 1e-12);
    const auto cache = forward(ae, x, true);
    CHECK(cache.embeddings() == z);
    CHECK(cache.reconstruction() == decode(ae, z));
    // Bitwise determinism.
    CHECK(encode(ae, x) == z);
}

TEST_CASE("forward rejects mismatched input width") {
    Rng rng(6);
    const auto hidden = dims({3});
    const auto ae = init_autoencoder(4, hidden, 2, true, rng);
    CHECK_THROWS_AS(encode(ae, Matrix(2, 5)), std::invalid_argument);
    CHECK_THROWS_AS(decode(ae, Matrix(2, 3)), std::invalid_argument);
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
    Rng rng(7);
    const auto hidden = dims({5});
    const auto ae = init_autoencoder(3, hidden, 2, true, rng);
    const Matrix x = oracle::random_matrix(4, 3, rng);
    const auto cache = forward(ae, x, true);
    const auto g = backward(ae, cache, Matrix(4, 2), Matrix(4, 3));
    for (double v : flatten(g)) CHECK(v == 0.0);
}

TEST_CASE("single linear layer under squared loss has the closed-form gradient") {
    Rng rng(8);
    const auto ae = init_autoencoder(4, {}, 3, false, rng);
    const Matrix x = oracle::random_matrix(6, 4, rng);
    const Matrix y = oracle::random_matrix(6, 3, rng);
    const auto cache = forward(ae, x, false);
    // L = ||XW + b - Y||^2 / B, so dL/dZ = 2 (Z - Y) / B.
    const Matrix residual = subtract(cache.embeddings(), y);
    const auto g = backward(ae, cache, scaled(residual, 2.0 / 6.0), Matrix{});

    const Matrix expected = scaled(oracle::matmul(transpose(x), residual), 2.0 / 6.0);
    CHECK(max_abs_diff(g.encoder[0].weight, expected) <= 1e-12);
}

TEST_CASE("backward rejects gradients that do not match the cache") {
    Rng rng(9);
    const auto hidden = dims({5});
    const auto ae = init_autoencoder(3, hidden, 2, true, rng);
    const auto cache = forward(ae, oracle::random_matrix(4, 3, rng), false);
    CHECK_THROWS_AS(backward(ae, cache, Matrix(3, 2), Matrix{}), std::invalid_argument);
    CHECK_THROWS_AS(backward(ae, cache, Matrix{}, Matrix(4, 3)), std::invalid_argument);
}

TEST_CASE("full scgc objective on an 8-node toy passes the finite-difference check") {
    Rng rng(10);
    const auto inst = gradcheck::make_instance(rng, 8, 5, 3, 3);
    CHECK(gradcheck::check(inst, gradcheck::Term::TotalScgc) < 1e-4);
}

TEST_CASE("every loss term passes the finite-difference check on random instances") {
    Rng rng(11);
    using gradcheck::Term;
    for (int trial = 0; trial < 4; ++trial) {
        const std::size_t n = 4 + rng.uniform_index(13);
        const std::size_t d = 2 + rng.uniform_index(7);
        const std::size_t e = 2 + rng.uniform_index(3);
        const auto inst = gradcheck::make_instance(rng, n, d, e, 3);
        for (Term t : {Term::Reconstruction, Term::NeighbourContrast, Term::InfluenceContrast, Term::Cluster,
                       Term::TotalScgc, Term::TotalStar}) {
            CAPTURE(gradcheck::name(t));
            CHECK(gradcheck::check(inst, t) < 1e-4);
        }
    }
}

TEST_CASE("flatten and unflatten round trip") {
    Rng rng(12);
    const auto hidden = dims({4});
    const auto ae = init_autoencoder(3, hidden, 2, true, rng);
    auto copy = init_autoencoder(3, hidden, 2, true, rng);
    unflatten(copy, flatten(ae));
    CHECK(copy.encoder == ae.encoder);
    CHECK(copy.decoder == ae.decoder);
    CHECK_THROWS_AS(unflatten(copy, std::vector<double>(3)), std::invalid_argument);
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
    Rng rng(13);
    const auto hidden = dims({4});
    auto ae = init_autoencoder(3, hidden, 2, true, rng);
    const auto before = ae;
    auto state = make_adam(1e-2);
    const auto grads = zero_grads(ae);
    for (int i = 0; i < 3; ++i) adam_step(state, param_blocks(ae, grads));
    CHECK(ae == before);
    CHECK(state.step == 3);
}

TEST_CASE("first adam step moves by lr times the gradient sign") {
    std::vector<double> w{0.5, -0.25, 1.0};
    const std::vector<double> g{1e3, -5e2, 2e4};
    auto state = make_adam(0.01);
    const std::vector<ParamBlock> blocks{{"w", w, g}};
    adam_step(state, blocks);
    CHECK(w[0] == doctest::Approx(0.5 - 0.01).epsilon(1e-9));
    CHECK(w[1] == doctest::Approx(-0.25 + 0.01).epsilon(1e-9));
    CHECK(w[2] == doctest::Approx(1.0 - 0.01).epsilon(1e-9));
}

TEST_CASE("adam decreases a convex quadratic monotonically over 100 steps") {
    // f(w) = sum_k c_k (w_k - t_k)^2
    const std::vector<double> c{1.0, 3.0, 0.5, 2.0};
    const std::vector<double> t{1.0, -2.0, 0.5, 3.0};
    std::vector<double> w(4, 0.0), g(4);
    const auto f = [&] {
        double s = 0.0;
        for (std::size_t k = 0; k < 4; ++k) s += c[k] * (w[k] - t[k]) * (w[k] - t[k]);
        return s;
    };
    auto state = make_adam(0.01);
    double prev = f();
    for (int step = 0; step < 100; ++step) {
        for (std::size_t k = 0; k < 4; ++k) g[k] = 2.0 * c[k] * (w[k] - t[k]);
        const std::vector<ParamBlock> blocks{{"w", w, g}};
        adam_step(state, blocks);
        const double cur = f();
        REQUIRE(cur < prev);
        prev = cur;
    }
}

TEST_CASE("adam names the block with a non-finite gradient and leaves parameters intact") {
    std::vector<double> a{1.0}, b{2.0};
    const std::vector<double> ga{0.1}, gb{std::nan("")};
    auto state = make_adam(0.1);
    const std::vector<ParamBlock> blocks{{"encoder.0.weight", a, ga}, {"encoder.0.bias", b, gb}};
    try {
        adam_step(state, blocks);
        FAIL("expected throw");
    } catch (const std::domain_error& e) {
        CHECK(std::string(e.what()).find("encoder.0.bias") != std::string::npos);
    }
    CHECK(a[0] == 1.0);
    CHECK(b[0] == 2.0);
}
