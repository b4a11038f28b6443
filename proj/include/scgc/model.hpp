#pragma once

#include "scgc/matrix.hpp"
#include "scgc/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace scgc {

enum class Activation { Relu };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Fully connected layer computing act(input * weight + bias).
/// weight is (fan_in x fan_out).
struct DenseLayer {
    Matrix weight;
    std::vector<double> bias;

    std::size_t fan_in() const { return weight.rows(); }
    std::size_t fan_out() const { return weight.cols(); }
    std::size_t parameter_count() const { return weight.size() + bias.size(); }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// MLP autoencoder. Hidden layers use the activation; the embedding layer and
/// the final reconstruction layer are linear. An empty decoder means an
/// encoder-only network.
struct AutoencoderParams {
    std::vector<DenseLayer> encoder;
    std::vector<DenseLayer> decoder;
    Activation activation = Activation::Relu;
    std::uint64_t init_seed = 0;

    std::size_t input_dim() const;
    std::size_t embed_dim() const;
    bool has_decoder() const { return !decoder.empty(); }
    std::size_t parameter_count() const;
    std::size_t encoder_parameter_count() const;

    /// Validates that layer shapes chain and the decoder mirrors the encoder.
    void validate() const;

    friend bool operator==(const AutoencoderParams&, const AutoencoderParams&) = default;
};

/// Builds input_dim -> hidden... -> embed_dim (and the mirrored decoder).
/// Weights are uniform in +-sqrt(1/fan_in), biases zero.
AutoencoderParams init_autoencoder(std::size_t input_dim, std::span<const std::size_t> hidden_dims,
                                   std::size_t embed_dim, bool with_decoder, Rng& rng);

/// Copy of params with the decoder dropped.
AutoencoderParams encoder_only(const AutoencoderParams& params);

/// Activations saved by a forward pass; consumed by backward().
struct ForwardCache {
    std::vector<Matrix> encoder_outputs;  // one per encoder layer; back() is Z
    std::vector<Matrix> decoder_outputs;  // one per decoder layer; back() is X_hat
    Matrix input;

    const Matrix& embeddings() const { return encoder_outputs.back(); }
    const Matrix& reconstruction() const { return decoder_outputs.back(); }
};

Matrix encode(const AutoencoderParams& params, const Matrix& x);
Matrix decode(const AutoencoderParams& params, const Matrix& z);

/// Encoder pass, plus decoder pass when `with_decoder` is set.
ForwardCache forward(const AutoencoderParams& params, const Matrix& x, bool with_decoder);

struct AutoencoderGrads {
    std::vector<DenseLayer> encoder;
    std::vector<DenseLayer> decoder;
};

AutoencoderGrads zero_grads(const AutoencoderParams& params);

/// Exact gradients given dL/dZ and dL/dX_hat. Either upstream matrix may be
/// empty (0x0) to mean "no dependence". Decoder gradients are computed only
/// when a reconstruction gradient is supplied.
AutoencoderGrads backward(const AutoencoderParams& params, const ForwardCache& cache, const Matrix& grad_z,
                          const Matrix& grad_x_hat);

/// Named view on one trainable tensor and its gradient.
struct ParamBlock {
    std::string name;
    std::span<double> values;
    std::span<const double> grad;
};

/// Ordered parameter/gradient pairing: encoder layers, then decoder layers.
std::vector<ParamBlock> param_blocks(AutoencoderParams& params, const AutoencoderGrads& grads);

struct OptimizerState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
};

OptimizerState make_adam(double learning_rate);

/// One bias-corrected Adam update over all blocks. Moments are allocated on
/// the first call; later calls must present the same block shapes. A
/// non-finite gradient aborts before any parameter is touched.
void adam_step(OptimizerState& state, std::span<const ParamBlock> blocks);

/// Flattened copy of every parameter, in param_blocks order.
std::vector<double> flatten(const AutoencoderParams& params);
void unflatten(AutoencoderParams& params, std::span<const double> values);
std::vector<double> flatten(const AutoencoderGrads& grads);

}  // namespace scgc
