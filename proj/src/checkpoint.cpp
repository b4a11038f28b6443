#include "scgc/checkpoint.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scgc {

namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "scgc-checkpoint";

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()},
                {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

Matrix matrix_from_json(const json& j) {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("data").get<std::vector<double>>());
}

json layers_to_json(const std::vector<DenseLayer>& layers) {
    json out = json::array();
    for (const auto& l : layers) out.push_back({{"weight", matrix_to_json(l.weight)}, {"bias", l.bias}});
    return out;
}

std::vector<DenseLayer> layers_from_json(const json& j) {
    std::vector<DenseLayer> layers;
    for (const auto& l : j) layers.push_back({matrix_from_json(l.at("weight")), l.at("bias").get<std::vector<double>>()});
    return layers;
}

}  // namespace

std::string checkpoint_to_json(const ClusteringModel& model) {
    const auto& net = model.network;
    std::vector<std::size_t> dims;
    if (!net.encoder.empty()) dims.push_back(net.input_dim());
    for (const auto& l : net.encoder) dims.push_back(l.fan_out());

    json j{{"format", kFormatTag},
           {"version", kCheckpointVersion},
           {"activation", to_string(net.activation)},
           {"init_seed", net.init_seed},
           {"dims", dims},
           {"has_decoder", net.has_decoder()},
           {"encoder", layers_to_json(net.encoder)},
           {"decoder", layers_to_json(net.decoder)},
           {"eta", model.eta},
           {"centroids", matrix_to_json(model.centroids)}};
    return j.dump();
}

ClusteringModel checkpoint_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (j.value("format", std::string{}) != kFormatTag) throw std::runtime_error("checkpoint: not an scgc checkpoint");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
        throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(version));
    }
    ClusteringModel model;
    model.network.activation = activation_from_string(j.at("activation").get<std::string>());
    model.network.init_seed = j.at("init_seed").get<std::uint64_t>();
    model.network.encoder = layers_from_json(j.at("encoder"));
    model.network.decoder = layers_from_json(j.at("decoder"));
    model.network.validate();
    model.eta = j.at("eta").get<double>();
    model.centroids = matrix_from_json(j.at("centroids"));

    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    if (dims.size() != model.network.encoder.size() + 1 || dims.front() != model.network.input_dim()) {
        throw std::runtime_error("checkpoint: dims do not match stored layers");
    }
    if (!model.centroids.empty() && model.centroids.cols() != model.network.embed_dim()) {
        throw std::runtime_error("checkpoint: centroid width does not match embedding dim");
    }
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const ClusteringModel& model) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
    out << checkpoint_to_json(model) << '\n';
}

ClusteringModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return checkpoint_from_json(buffer.str());
}

}  // namespace scgc
