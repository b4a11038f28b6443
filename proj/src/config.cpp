#include "scgc/config.hpp"

#include <json.hpp>

#include <stdexcept>

namespace scgc {

using nlohmann::json;

void TrainConfig::validate() const {
    loss_weights().validate();
    if (hops < 1) throw std::invalid_argument("hops must be >= 1");
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
    if (!(lr_pretrain > 0.0) || !(lr_train > 0.0)) throw std::invalid_argument("learning rates must be > 0");
    if (pretrain_epochs < 1 || train_epochs < 1) throw std::invalid_argument("epoch counts must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (cluster_count < 2) throw std::invalid_argument("cluster_count must be >= 2");
    if (ae_dims.size() < 2) {
        throw std::invalid_argument("ae_dims needs at least one hidden layer plus the embedding width");
    }
    for (std::size_t d : ae_dims)
        if (d < 1) throw std::invalid_argument("ae_dims entries must be >= 1");
    if (kmeans_max_iter < 1) throw std::invalid_argument("kmeans_max_iter must be >= 1");
    if (!(kmeans_tol >= 0.0)) throw std::invalid_argument("kmeans_tol must be >= 0");
}

std::string config_to_json(const TrainConfig& c) {
    json j{{"name", c.name},
           {"variant", to_string(c.variant)},
           {"alpha", c.alpha},
           {"beta", c.beta},
           {"tau", c.tau},
           {"hops", c.hops},
           {"eta", c.eta},
           {"lr_pretrain", c.lr_pretrain},
           {"lr_train", c.lr_train},
           {"pretrain_epochs", c.pretrain_epochs},
           {"train_epochs", c.train_epochs},
           {"batch_size", c.batch_size},
           {"full_batch", c.full_batch},
           {"seed", c.seed},
           {"cluster_count", c.cluster_count},
           {"ae_dims", c.ae_dims},
           {"similarity", to_string(c.similarity)},
           {"reconstruction", to_string(c.reconstruction)},
           {"cluster_reduction", to_string(c.cluster_reduction)},
           {"kmeans_max_iter", c.kmeans_max_iter},
           {"kmeans_tol", c.kmeans_tol}};
    return j.dump(2);
}

TrainConfig config_from_json(const std::string& text, TrainConfig c) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");

    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "name") c.name = value.get<std::string>();
            else if (key == "variant") c.variant = variant_from_string(value.get<std::string>());
            else if (key == "alpha") c.alpha = value.get<double>();
            else if (key == "beta") c.beta = value.get<double>();
            else if (key == "tau") c.tau = value.get<double>();
            else if (key == "hops" || key == "K") c.hops = value.get<std::size_t>();
            else if (key == "eta") c.eta = value.get<double>();
            else if (key == "lr_pretrain") c.lr_pretrain = value.get<double>();
            else if (key == "lr_train") c.lr_train = value.get<double>();
            else if (key == "pretrain_epochs") c.pretrain_epochs = value.get<std::size_t>();
            else if (key == "train_epochs") c.train_epochs = value.get<std::size_t>();
            else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
            else if (key == "full_batch") c.full_batch = value.get<bool>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "cluster_count") c.cluster_count = value.get<std::size_t>();
            else if (key == "ae_dims") c.ae_dims = value.get<std::vector<std::size_t>>();
            else if (key == "similarity") c.similarity = similarity_from_string(value.get<std::string>());
            else if (key == "reconstruction") c.reconstruction = reduction_from_string(value.get<std::string>());
            else if (key == "cluster_reduction") c.cluster_reduction = reduction_from_string(value.get<std::string>());
            else if (key == "kmeans_max_iter") c.kmeans_max_iter = value.get<std::size_t>();
            else if (key == "kmeans_tol") c.kmeans_tol = value.get<double>();
            else throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: wrong value type: ") + e.what());
    }
    return c;
}

}  // namespace scgc
