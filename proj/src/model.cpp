#include "scgc/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scgc {

namespace {

Matrix layer_forward(const DenseLayer& layer, const Matrix& input, bool apply_activation) {
    if (input.cols() != layer.fan_in()) {
        throw std::invalid_argument("layer input has " + std::to_string(input.cols()) + " columns, expected " +
                                    std::to_string(layer.fan_in()));
    }
    Matrix out = matmul(input, layer.weight);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto r = out.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            const double v = r[j] + layer.bias[j];
            r[j] = apply_activation ? (v > 0.0 ? v : 0.0) : v;
        }
    }
    return out;
}

// Returns dL/d(input) and fills the layer gradient. `output` is the
// post-activation value saved by the forward pass.
Matrix layer_backward(const DenseLayer& layer, const Matrix& input, const Matrix& output, Matrix grad_out,
                      bool activated, DenseLayer& grad) {
    if (!grad_out.same_shape(output)) {
        throw std::invalid_argument("backward: upstream gradient " + grad_out.shape_string() +
                                    " does not match cached activation " + output.shape_string());
    }
    if (activated) {
        auto g = grad_out.values();
        auto o = output.values();
        for (std::size_t k = 0; k < g.size(); ++k)
            if (!(o[k] > 0.0)) g[k] = 0.0;
    }
    grad.weight = matmul_tn(input, grad_out);
    grad.bias = column_sums(grad_out);
    return matmul_nt(grad_out, layer.weight);
}

void check_layers(const std::vector<DenseLayer>& layers, const char* which) {
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& l = layers[k];
        if (l.bias.size() != l.fan_out()) {
            throw std::invalid_argument(std::string(which) + " layer " + std::to_string(k) +
                                        ": bias length does not match fan-out");
        }
        if (k > 0 && l.fan_in() != layers[k - 1].fan_out()) {
            throw std::invalid_argument(std::string(which) + " layer " + std::to_string(k) +
                                        ": input dim does not match previous output dim");
        }
    }
}

}  // namespace

const char* to_string(Activation) {
    return "relu";
}

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    throw std::invalid_argument("unknown activation '" + name + "'");
}

std::size_t AutoencoderParams::input_dim() const {
    return encoder.empty() ? 0 : encoder.front().fan_in();
}

std::size_t AutoencoderParams::embed_dim() const {
    return encoder.empty() ? 0 : encoder.back().fan_out();
}

std::size_t AutoencoderParams::parameter_count() const {
    std::size_t total = encoder_parameter_count();
    for (const auto& l : decoder) total += l.parameter_count();
    return total;
}

std::size_t AutoencoderParams::encoder_parameter_count() const {
    std::size_t total = 0;
    for (const auto& l : encoder) total += l.parameter_count();
    return total;
}

void AutoencoderParams::validate() const {
    if (encoder.empty()) throw std::invalid_argument("autoencoder has no encoder layers");
    check_layers(encoder, "encoder");
    if (decoder.empty()) return;
    check_layers(decoder, "decoder");
    if (decoder.size() != encoder.size()) throw std::invalid_argument("decoder depth does not mirror encoder");
    for (std::size_t k = 0; k < encoder.size(); ++k) {
        const auto& e = encoder[encoder.size() - 1 - k];
        const auto& d = decoder[k];
        if (d.fan_in() != e.fan_out() || d.fan_out() != e.fan_in()) {
            throw std::invalid_argument("decoder layer " + std::to_string(k) + " does not mirror encoder");
        }
    }
}

AutoencoderParams init_autoencoder(std::size_t input_dim, std::span<const std::size_t> hidden_dims,
                                   std::size_t embed_dim, bool with_decoder, Rng& rng) {
    std::vector<std::size_t> dims{input_dim};
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
    dims.push_back(embed_dim);
    for (std::size_t d : dims)
        if (d == 0) throw std::invalid_argument("init_autoencoder: all dimensions must be >= 1");

    auto make_layer = [&rng](std::size_t fan_in, std::size_t fan_out) {
        DenseLayer layer{Matrix(fan_in, fan_out), std::vector<double>(fan_out, 0.0)};
        const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
        for (double& w : layer.weight.values()) w = rng.uniform(-bound, bound);
        return layer;
    };

    AutoencoderParams params;
    params.init_seed = rng.seed();
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) params.encoder.push_back(make_layer(dims[k], dims[k + 1]));
    if (with_decoder) {
        for (std::size_t k = dims.size() - 1; k > 0; --k) params.decoder.push_back(make_layer(dims[k], dims[k - 1]));
    }
    return params;
}

AutoencoderParams encoder_only(const AutoencoderParams& params) {
    AutoencoderParams out = params;
    out.decoder.clear();
    return out;
}

ForwardCache forward(const AutoencoderParams& params, const Matrix& x, bool with_decoder) {
    if (params.encoder.empty()) throw std::invalid_argument("forward: autoencoder has no encoder layers");
    if (x.cols() != params.input_dim()) {
        throw std::invalid_argument("forward: input " + x.shape_string() + " does not match input dim " +
                                    std::to_string(params.input_dim()));
    }
    if (with_decoder && !params.has_decoder()) {
        throw std::invalid_argument("forward: decoder requested on encoder-only parameters");
    }
    ForwardCache cache;
    cache.input = x;
    const Matrix* h = &x;
    for (std::size_t k = 0; k < params.encoder.size(); ++k) {
        const bool hidden = k + 1 < params.encoder.size();
        cache.encoder_outputs.push_back(layer_forward(params.encoder[k], *h, hidden));
        h = &cache.encoder_outputs.back();
    }
    if (with_decoder) {
        for (std::size_t k = 0; k < params.decoder.size(); ++k) {
            const bool hidden = k + 1 < params.decoder.size();
            cache.decoder_outputs.push_back(layer_forward(params.decoder[k], *h, hidden));
            h = &cache.decoder_outputs.back();
        }
    }
    return cache;
}

Matrix encode(const AutoencoderParams& params, const Matrix& x) {
    auto cache = forward(params, x, false);
    return std::move(cache.encoder_outputs.back());
}

Matrix decode(const AutoencoderParams& params, const Matrix& z) {
    if (!params.has_decoder()) throw std::invalid_argument("decode: parameters are encoder-only");
    if (z.cols() != params.embed_dim()) {
        throw std::invalid_argument("decode: embedding " + z.shape_string() + " does not match embed dim " +
                                    std::to_string(params.embed_dim()));
    }
    Matrix h = z;
    for (std::size_t k = 0; k < params.decoder.size(); ++k)
        h = layer_forward(params.decoder[k], h, k + 1 < params.decoder.size());
    return h;
}

AutoencoderGrads zero_grads(const AutoencoderParams& params) {
    AutoencoderGrads grads;
    for (const auto& l : params.encoder)
        grads.encoder.push_back({Matrix(l.fan_in(), l.fan_out()), std::vector<double>(l.fan_out(), 0.0)});
    for (const auto& l : params.decoder)
        grads.decoder.push_back({Matrix(l.fan_in(), l.fan_out()), std::vector<double>(l.fan_out(), 0.0)});
    return grads;
}

AutoencoderGrads backward(const AutoencoderParams& params, const ForwardCache& cache, const Matrix& grad_z,
                          const Matrix& grad_x_hat) {
    if (cache.encoder_outputs.size() != params.encoder.size()) {
        throw std::invalid_argument("backward: cache does not match encoder depth");
    }
    AutoencoderGrads grads = zero_grads(params);
    const Matrix& z = cache.embeddings();

    Matrix upstream_z(z.rows(), z.cols());
    if (!grad_z.empty()) {
        if (!grad_z.same_shape(z)) {
            throw std::invalid_argument("backward: embedding gradient " + grad_z.shape_string() +
                                        " does not match cached embeddings " + z.shape_string());
        }
        upstream_z = grad_z;
    }

    if (!grad_x_hat.empty()) {
        if (cache.decoder_outputs.size() != params.decoder.size() || params.decoder.empty()) {
            throw std::invalid_argument("backward: reconstruction gradient given without a cached decoder pass");
        }
        Matrix g = grad_x_hat;
        for (std::size_t k = params.decoder.size(); k-- > 0;) {
            const Matrix& input = k == 0 ? z : cache.decoder_outputs[k - 1];
            const bool hidden = k + 1 < params.decoder.size();
            g = layer_backward(params.decoder[k], input, cache.decoder_outputs[k], std::move(g), hidden,
                               grads.decoder[k]);
        }
        add_in_place(upstream_z, g);
    }

    Matrix g = std::move(upstream_z);
    for (std::size_t k = params.encoder.size(); k-- > 0;) {
        const Matrix& input = k == 0 ? cache.input : cache.encoder_outputs[k - 1];
        const bool hidden = k + 1 < params.encoder.size();
        g = layer_backward(params.encoder[k], input, cache.encoder_outputs[k], std::move(g), hidden,
                           grads.encoder[k]);
    }
    return grads;
}

std::vector<ParamBlock> param_blocks(AutoencoderParams& params, const AutoencoderGrads& grads) {
    if (grads.encoder.size() != params.encoder.size() || grads.decoder.size() != params.decoder.size()) {
        throw std::invalid_argument("param_blocks: gradient layout does not match parameters");
    }
    std::vector<ParamBlock> blocks;
    auto append = [&blocks](const std::string& prefix, std::vector<DenseLayer>& layers,
                            const std::vector<DenseLayer>& grad_layers) {
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const std::string base = prefix + "." + std::to_string(k);
            blocks.push_back({base + ".weight", layers[k].weight.values(), grad_layers[k].weight.values()});
            blocks.push_back({base + ".bias", layers[k].bias, grad_layers[k].bias});
        }
    };
    append("encoder", params.encoder, grads.encoder);
    append("decoder", params.decoder, grads.decoder);
    return blocks;
}

OptimizerState make_adam(double learning_rate) {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    OptimizerState state;
    state.learning_rate = learning_rate;
    return state;
}

void adam_step(OptimizerState& state, std::span<const ParamBlock> blocks) {
    if (state.first_moment.empty()) {
        for (const auto& b : blocks) {
            state.first_moment.emplace_back(b.values.size(), 0.0);
            state.second_moment.emplace_back(b.values.size(), 0.0);
        }
    }
    if (state.first_moment.size() != blocks.size()) {
        throw std::invalid_argument("adam_step: block count changed between steps");
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& block = blocks[b];
        if (block.grad.size() != block.values.size() || state.first_moment[b].size() != block.values.size()) {
            throw std::invalid_argument("adam_step: shape mismatch in block " + block.name);
        }
        for (double g : block.grad)
            if (!std::isfinite(g)) throw std::domain_error("adam_step: non-finite gradient in " + block.name);
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        auto& m = state.first_moment[b];
        auto& v = state.second_moment[b];
        auto values = blocks[b].values;
        auto grad = blocks[b].grad;
        for (std::size_t i = 0; i < values.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * grad[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            values[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

std::vector<double> flatten(const AutoencoderParams& params) {
    std::vector<double> out;
    out.reserve(params.parameter_count());
    for (const auto* layers : {&params.encoder, &params.decoder}) {
        for (const auto& l : *layers) {
            out.insert(out.end(), l.weight.values().begin(), l.weight.values().end());
            out.insert(out.end(), l.bias.begin(), l.bias.end());
        }
    }
    return out;
}

void unflatten(AutoencoderParams& params, std::span<const double> values) {
    if (values.size() != params.parameter_count()) {
        throw std::invalid_argument("unflatten: expected " + std::to_string(params.parameter_count()) +
                                    " values, got " + std::to_string(values.size()));
    }
    std::size_t offset = 0;
    for (auto* layers : {&params.encoder, &params.decoder}) {
        for (auto& l : *layers) {
            auto w = l.weight.values();
            std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), w.size(), w.begin());
            offset += w.size();
            std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), l.bias.size(), l.bias.begin());
            offset += l.bias.size();
        }
    }
}

std::vector<double> flatten(const AutoencoderGrads& grads) {
    std::vector<double> out;
    for (const auto* layers : {&grads.encoder, &grads.decoder}) {
        for (const auto& l : *layers) {
            out.insert(out.end(), l.weight.values().begin(), l.weight.values().end());
            out.insert(out.end(), l.bias.begin(), l.bias.end());
        }
    }
    return out;
}

}  // namespace scgc
