#include "scgc/cli.hpp"

#include "scgc/checkpoint.hpp"
#include "scgc/dataio.hpp"
#include "scgc/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace scgc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        long long v = std::stoll(item, &used);
        if (used != item.size() || v < 0) throw std::invalid_argument("bad list entry '" + item + "'");
        values.push_back(static_cast<std::size_t>(v));
    }
    if (values.empty()) throw std::invalid_argument("empty list '" + text + "'");
    return values;
}

/// Config file plus per-flag overrides shared by pretrain/train/sweep.
struct ConfigFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string variant;
    double alpha = 0, beta = 0, tau = 0, eta = 0, lr = 0;
    std::size_t hops = 0, epochs = 0, batch_size = 0, clusters = 0;
    bool full_batch = true;
    std::string ae_dims;

    std::map<std::string, CLI::Option*> opts;

    void attach(CLI::App* app, const std::string& epochs_help) {
        opts["config"] = app->add_option("--config", config_path, "JSON TrainConfig file")->check(CLI::ExistingFile);
        opts["seed"] = app->add_option("--seed", seed, "random seed");
        opts["variant"] = app->add_option("--variant", variant, "scgc or scgc-star");
        opts["alpha"] = app->add_option("--alpha", alpha, "structure (contrastive) weight");
        opts["beta"] = app->add_option("--beta", beta, "cluster KL weight");
        opts["tau"] = app->add_option("--tau", tau, "contrastive temperature");
        opts["hops"] = app->add_option("--hops,--K", hops, "influence hop depth R");
        opts["eta"] = app->add_option("--eta", eta, "Student-t degrees of freedom");
        opts["lr"] = app->add_option("--lr", lr, "learning rate of this phase");
        opts["epochs"] = app->add_option("--epochs", epochs, epochs_help);
        opts["batch_size"] = app->add_option("--batch-size", batch_size, "mini-batch size");
        opts["full_batch"] = app->add_flag("--full-batch,!--no-full-batch", full_batch, "train on all nodes per step");
        opts["clusters"] = app->add_option("--clusters", clusters, "cluster count C");
        opts["ae_dims"] = app->add_option("--ae-dims", ae_dims, "hidden widths then embedding width, e.g. 500,500,2000,10");
    }

    bool given(const std::string& key) const { return opts.at(key)->count() > 0; }

    /// `phase` selects which epoch/lr field the generic flags address.
    TrainConfig resolve(bool pretrain_phase, std::size_t dataset_classes) const {
        TrainConfig c;
        bool clusters_explicit = false;
        if (given("config")) {
            const std::string text = read_file(config_path);
            c = config_from_json(text);
            clusters_explicit = json::parse(text).contains("cluster_count");
        }
        if (given("seed")) c.seed = seed;
        if (given("variant")) c.variant = variant_from_string(variant);
        if (given("alpha")) c.alpha = alpha;
        if (given("beta")) c.beta = beta;
        if (given("tau")) c.tau = tau;
        if (given("hops")) c.hops = hops;
        if (given("eta")) c.eta = eta;
        if (given("lr")) (pretrain_phase ? c.lr_pretrain : c.lr_train) = lr;
        if (given("epochs")) (pretrain_phase ? c.pretrain_epochs : c.train_epochs) = epochs;
        if (given("batch_size")) c.batch_size = batch_size;
        if (given("full_batch")) c.full_batch = full_batch;
        if (given("ae_dims")) c.ae_dims = parse_size_list(ae_dims);
        if (given("clusters")) {
            c.cluster_count = clusters;
            clusters_explicit = true;
        }
        if (!clusters_explicit && dataset_classes >= 2) c.cluster_count = dataset_classes;
        c.validate();
        return c;
    }
};

struct DataFlags {
    std::string dir;
    std::size_t knn = 0;
    CLI::Option* knn_opt = nullptr;

    void attach(CLI::App* app) {
        app->add_option("--data", dir, "dataset directory")->required()->check(CLI::ExistingDirectory);
        knn_opt = app->add_option("--knn", knn, "build a KNN graph with this k (datasets without edges.txt)");
    }

    std::optional<std::size_t> knn_k() const {
        return knn_opt->count() > 0 ? std::optional<std::size_t>(knn) : std::nullopt;
    }
};

std::optional<std::span<const int>> label_view(const std::optional<std::vector<int>>& labels) {
    if (!labels) return std::nullopt;
    return std::span<const int>(*labels);
}

void write_embeddings(const fs::path& path, const Matrix& z) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_rows_tsv(out, z);
}

int run_synth(const SbmParams& params, std::uint64_t seed, const fs::path& out_dir, std::ostream& out) {
    Rng rng(seed);
    auto sample = sbm_generate(params, rng);
    Dataset ds;
    ds.name = out_dir.filename().string();
    ds.features = std::move(sample.features);
    ds.graph = std::move(sample.graph);
    ds.labels = std::move(sample.labels);
    ds.class_count = params.block_sizes.size();
    save_dataset(out_dir, ds);
    out << "wrote " << ds.features.rows() << " nodes, " << ds.graph.edge_count() << " edges to " << out_dir.string()
        << '\n';
    return 0;
}

int run_pretrain(const DataFlags& data, const ConfigFlags& flags, const fs::path& out_dir, bool verbose,
                 std::ostream& out, std::ostream& err) {
    const NodeData nodes = load_node_data(data.dir);
    const TrainConfig config = flags.resolve(true, nodes.class_count);
    fs::create_directories(out_dir);
    write_file(out_dir / "config.json", config_to_json(config) + "\n");

    const auto result = pretrain(nodes.features, config, verbose ? &err : nullptr);
    save_checkpoint(out_dir / "checkpoint.json", {result.network, result.centroids, config.eta});

    json summary{{"reconstruction", result.reconstruction_history.back()},
                 {"kmeans_inertia", result.kmeans.inertia},
                 {"kmeans_iterations", result.kmeans.iterations}};
    if (nodes.labels) {
        summary["kmeans_metrics"] = json::parse(to_json(clustering_metrics(result.kmeans.assignments, *nodes.labels)));
    }
    write_file(out_dir / "pretrain.json", summary.dump(2) + "\n");
    out << summary.dump() << '\n';
    return 0;
}

int run_train(const DataFlags& data, const ConfigFlags& flags, const fs::path& checkpoint_path,
              const fs::path& out_dir, const std::string& export_path, bool verbose, std::ostream& out,
              std::ostream& err) {
    const Dataset ds = load_dataset(data.dir, data.knn_k());
    const ClusteringModel pretrained = load_checkpoint(checkpoint_path);
    if (pretrained.centroids.empty()) throw std::runtime_error("checkpoint has no centroids");

    TrainConfig config = flags.resolve(false, pretrained.centroids.rows());
    config.cluster_count = pretrained.centroids.rows();
    config.eta = pretrained.eta;
    config.ae_dims.clear();
    for (const auto& l : pretrained.network.encoder) config.ae_dims.push_back(l.fan_out());
    config.validate();

    fs::create_directories(out_dir);
    write_file(out_dir / "config.json", config_to_json(config) + "\n");

    const auto labels = label_view(ds.labels);
    auto result = train(ds.features, ds.graph, config, pretrained.network, pretrained.centroids, labels,
                        verbose ? &err : nullptr);
    {
        std::ofstream history(out_dir / "history.jsonl");
        for (const auto& record : result.history.epochs) history << to_json(record) << '\n';
    }
    save_checkpoint(out_dir / "checkpoint.json", result.model);

    const auto evaluation = evaluate(result.model, ds.features, labels);
    write_embeddings(out_dir / "embeddings.tsv", evaluation.embeddings);
    if (!export_path.empty()) write_embeddings(export_path, evaluation.embeddings);
    if (evaluation.report) {
        write_file(out_dir / "report.json", to_json(*evaluation.report) + "\n");
        out << to_json(*evaluation.report) << '\n';
    } else {
        out << "trained " << result.history.epochs.size() << " epochs; no labels, no report\n";
    }
    return 0;
}

int run_eval(const std::string& data_dir, const fs::path& checkpoint_path, const std::string& out_dir,
             const std::string& export_path, std::ostream& out) {
    const NodeData nodes = load_node_data(data_dir);
    const ClusteringModel model = load_checkpoint(checkpoint_path);
    if (model.centroids.empty()) throw std::runtime_error("checkpoint has no centroids");
    const auto evaluation = evaluate(model, nodes.features, label_view(nodes.labels));

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_embeddings(fs::path(out_dir) / "embeddings.tsv", evaluation.embeddings);
        if (evaluation.report) write_file(fs::path(out_dir) / "report.json", to_json(*evaluation.report) + "\n");
    }
    if (!export_path.empty()) write_embeddings(export_path, evaluation.embeddings);
    if (evaluation.report) {
        out << to_json(*evaluation.report) << '\n';
    } else {
        out << "{\"nodes\":" << nodes.features.rows() << ",\"report\":null}\n";
    }
    return 0;
}

int run_influence(const DataFlags& data, std::size_t hops, const std::string& mode, std::ostream& out) {
    const Dataset ds = load_dataset(data.dir, data.knn_k());
    const Matrix a_hat = normalize_adjacency(ds.graph);
    InfluenceMatrix inf;
    if (mode == "cumulative") {
        inf = cumulative_influence(a_hat, hops);
    } else if (mode == "single") {
        inf = single_power_influence(a_hat, hops);
    } else {
        throw std::invalid_argument("--mode must be cumulative or single");
    }
    const auto& g = inf.gamma;
    std::size_t nonzero = 0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, total = 0.0, max_row = 0.0;
    for (std::size_t i = 0; i < g.rows(); ++i) {
        double row = 0.0;
        for (double v : g.row(i)) {
            if (v != 0.0) ++nonzero;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            total += v;
            row += v;
        }
        max_row = std::max(max_row, row);
    }
    json stats{{"nodes", g.rows()},
               {"edges", ds.graph.edge_count()},
               {"hops", inf.hops},
               {"mode", to_string(inf.mode)},
               {"nonzero", nonzero},
               {"density", static_cast<double>(nonzero) / static_cast<double>(g.size())},
               {"min", lo},
               {"max", hi},
               {"mean", total / static_cast<double>(g.size())},
               {"max_row_sum", max_row},
               {"symmetric", is_symmetric(g, 1e-12)}};
    out << stats.dump(2) << '\n';
    return 0;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

// Grid file:
// {"data": dir, "knn": k?, "base": {config}, "grid": {key: [values...]}, "seeds": [..]}
int run_sweep(const fs::path& grid_path, const fs::path& out_dir, bool verbose, std::ostream& out,
              std::ostream& err) {
    const json sweep = json::parse(read_file(grid_path));
    fs::path data_dir = sweep.at("data").get<std::string>();
    if (data_dir.is_relative()) data_dir = grid_path.parent_path() / data_dir;
    std::optional<std::size_t> knn;
    if (sweep.contains("knn")) knn = sweep.at("knn").get<std::size_t>();
    const Dataset ds = load_dataset(data_dir, knn);

    json base = sweep.value("base", json::object());
    if (!base.contains("cluster_count") && ds.class_count >= 2) base["cluster_count"] = ds.class_count;
    const std::vector<std::uint64_t> seeds = sweep.value("seeds", std::vector<std::uint64_t>{0});

    std::vector<std::pair<std::string, json>> axes;
    const json grid = sweep.value("grid", json::object());
    for (const auto& [key, values] : grid.items()) {
        if (!values.is_array() || values.empty()) throw std::invalid_argument("sweep: grid '" + key + "' must be a non-empty list");
        axes.emplace_back(key, values);
    }
    std::vector<json> combos{json::object()};
    for (const auto& [key, values] : axes) {
        std::vector<json> next;
        for (const auto& combo : combos)
            for (const auto& v : values) {
                json c = combo;
                c[key] = v;
                next.push_back(std::move(c));
            }
        combos = std::move(next);
    }

    fs::create_directories(out_dir);
    std::ofstream runs(out_dir / "runs.jsonl");
    json summary = json::array();
    std::map<std::string, PretrainResult> pretrain_cache;
    const auto labels = label_view(ds.labels);

    for (const auto& combo : combos) {
        std::map<std::string, std::vector<double>> scores;
        for (std::uint64_t seed : seeds) {
            json merged = base;
            merged.update(combo);
            merged["seed"] = seed;
            const TrainConfig config = config_from_json(merged.dump());
            config.validate();

            json pretrain_key{config.seed,        config.ae_dims,        config.lr_pretrain,
                              config.pretrain_epochs, config.batch_size, config.cluster_count,
                              config.kmeans_max_iter, config.kmeans_tol, to_string(config.reconstruction)};
            auto it = pretrain_cache.find(pretrain_key.dump());
            if (it == pretrain_cache.end())
                it = pretrain_cache.emplace(pretrain_key.dump(), pretrain(ds.features, config, verbose ? &err : nullptr)).first;

            auto result = train(ds.features, ds.graph, config, it->second.network, it->second.centroids, labels,
                                verbose ? &err : nullptr);
            const auto evaluation = evaluate(result.model, ds.features, labels);
            json line{{"params", combo}, {"seed", seed}};
            if (evaluation.report) {
                line["metrics"] = json::parse(to_json(*evaluation.report));
                scores["acc"].push_back(evaluation.report->acc);
                scores["nmi"].push_back(evaluation.report->nmi);
                scores["ari"].push_back(evaluation.report->ari);
                scores["f1"].push_back(evaluation.report->f1);
            }
            runs << line.dump() << '\n';
            runs.flush();
        }
        json entry{{"params", combo}, {"runs", seeds.size()}};
        for (const auto& [metric, values] : scores) entry[metric] = {{"mean", mean_of(values)}, {"std", std_of(values)}};
        out << entry.dump() << '\n';
        summary.push_back(std::move(entry));
    }
    write_file(out_dir / "summary.json", summary.dump(2) + "\n");
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Self-supervised contrastive graph clustering"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "log per-epoch progress to stderr");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a stochastic block model fixture dataset");
    SbmParams sbm;
    std::string blocks = "100,100,100";
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    synth->add_option("--blocks", blocks, "comma-separated block sizes")->capture_default_str();
    synth->add_option("--p-in", sbm.p_in, "intra-block edge probability")->capture_default_str();
    synth->add_option("--p-out", sbm.p_out, "inter-block edge probability")->capture_default_str();
    synth->add_option("--feature-dim", sbm.feature_dim, "feature dimension")->capture_default_str();
    synth->add_option("--noise", sbm.noise_sigma, "Gaussian feature noise sigma")->capture_default_str();
    synth->add_option("--seed", synth_seed, "random seed")->capture_default_str();
    synth->add_option("--out", synth_out, "output dataset directory")->required();

    // pretrain
    auto* pre = app.add_subcommand("pretrain", "reconstruction pretraining and k-means centroid init");
    DataFlags pre_data;
    ConfigFlags pre_flags;
    std::string pre_out;
    pre_data.attach(pre);
    pre_flags.attach(pre, "pretraining epochs");
    pre->add_option("--out", pre_out, "output directory")->required();

    // train
    auto* trn = app.add_subcommand("train", "joint self-supervised training from a pretrained checkpoint");
    DataFlags trn_data;
    ConfigFlags trn_flags;
    std::string trn_checkpoint, trn_out, trn_export;
    trn_data.attach(trn);
    trn_flags.attach(trn, "training epochs");
    trn->add_option("--checkpoint", trn_checkpoint, "pretrained checkpoint")->required()->check(CLI::ExistingFile);
    trn->add_option("--out", trn_out, "run artifacts directory")->required();
    trn->add_option("--export-embeddings", trn_export, "also write final embeddings TSV here");

    // eval
    auto* evl = app.add_subcommand("eval", "cluster a dataset with a trained checkpoint (no graph needed)");
    std::string evl_data, evl_checkpoint, evl_out, evl_export;
    evl->add_option("--data", evl_data, "dataset directory")->required()->check(CLI::ExistingDirectory);
    evl->add_option("--checkpoint", evl_checkpoint, "trained checkpoint")->required()->check(CLI::ExistingFile);
    evl->add_option("--out", evl_out, "directory for report.json and embeddings.tsv");
    evl->add_option("--export-embeddings", evl_export, "write embeddings TSV here");

    // influence
    auto* inf = app.add_subcommand("influence", "print statistics of the influence matrix");
    DataFlags inf_data;
    std::size_t inf_hops = 1;
    std::string inf_mode = "cumulative";
    inf_data.attach(inf);
    inf->add_option("--hops,--K", inf_hops, "hop depth R")->capture_default_str();
    inf->add_option("--mode", inf_mode, "cumulative or single")->capture_default_str();

    // sweep
    auto* swp = app.add_subcommand("sweep", "repeat runs over a config grid and seeds");
    std::string swp_grid, swp_out;
    swp->add_option("--grid", swp_grid, "sweep JSON file")->required()->check(CLI::ExistingFile);
    swp->add_option("--out", swp_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*synth) {
            sbm.block_sizes = parse_size_list(blocks);
            return run_synth(sbm, synth_seed, synth_out, out);
        }
        if (*pre) return run_pretrain(pre_data, pre_flags, pre_out, verbose, out, err);
        if (*trn) return run_train(trn_data, trn_flags, trn_checkpoint, trn_out, trn_export, verbose, out, err);
        if (*evl) return run_eval(evl_data, evl_checkpoint, evl_out, evl_export, out);
        if (*inf) return run_influence(inf_data, inf_hops, inf_mode, out);
        if (*swp) return run_sweep(swp_grid, swp_out, verbose, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace scgc
