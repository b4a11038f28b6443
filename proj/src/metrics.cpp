#include "scgc/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace scgc {

namespace {

using Table = std::vector<std::vector<double>>;

void check_labels(std::span<const int> pred, std::span<const int> truth) {
    if (pred.empty()) throw std::invalid_argument("clustering metrics: empty label vectors");
    if (pred.size() != truth.size()) {
        throw std::invalid_argument("clustering metrics: pred has " + std::to_string(pred.size()) +
                                    " labels, truth has " + std::to_string(truth.size()));
    }
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] < 0 || truth[i] < 0) throw std::invalid_argument("clustering metrics: negative label");
}

std::size_t label_span(std::span<const int> pred, std::span<const int> truth) {
    int top = 0;
    for (int v : pred) top = std::max(top, v);
    for (int v : truth) top = std::max(top, v);
    return static_cast<std::size_t>(top) + 1;
}

// confusion[cluster][class]
Table confusion_matrix(std::span<const int> pred, std::span<const int> truth, std::size_t k) {
    Table table(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < pred.size(); ++i) table[pred[i]][truth[i]] += 1.0;
    return table;
}

double assignment_value(const Table& w, const std::vector<int>& assign) {
    double total = 0.0;
    for (std::size_t r = 0; r < assign.size(); ++r) total += w[r][assign[r]];
    return total;
}

double comb2(double x) {
    return x * (x - 1.0) / 2.0;
}

double entropy(const std::vector<double>& counts, double n) {
    double h = 0.0;
    for (double c : counts)
        if (c > 0.0) h -= (c / n) * std::log(c / n);
    return h;
}

// Partitions are equal up to relabeling iff the cluster<->class
// co-occurrence is one-to-one.
bool same_partition(std::span<const int> pred, std::span<const int> truth) {
    const std::size_t k = label_span(pred, truth);
    std::vector<int> fwd(k, -1), back(k, -1);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        int& f = fwd[pred[i]];
        int& b = back[truth[i]];
        if (f == -1) f = truth[i];
        if (b == -1) b = pred[i];
        if (f != truth[i] || b != pred[i]) return false;
    }
    return true;
}

}  // namespace

std::vector<int> max_weight_assignment(const Table& weight) {
    const std::size_t n = weight.size();
    for (const auto& row : weight)
        if (row.size() != n) throw std::invalid_argument("max_weight_assignment: matrix must be square");
    if (n == 0) return {};

    double top = -std::numeric_limits<double>::infinity();
    for (const auto& row : weight)
        for (double v : row) top = std::max(top, v);

    // Shortest augmenting path Hungarian algorithm on cost = top - weight,
    // 1-based with a sentinel column 0.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t row = 1; row <= n; ++row) {
        match[0] = row;
        std::size_t col0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[col0] = true;
            const std::size_t r0 = match[col0];
            double delta = inf;
            std::size_t col1 = 0;
            for (std::size_t c = 1; c <= n; ++c) {
                if (used[c]) continue;
                const double cur = (top - weight[r0 - 1][c - 1]) - u[r0] - v[c];
                if (cur < minv[c]) {
                    minv[c] = cur;
                    way[c] = col0;
                }
                if (minv[c] < delta) {
                    delta = minv[c];
                    col1 = c;
                }
            }
            for (std::size_t c = 0; c <= n; ++c) {
                if (used[c]) {
                    u[match[c]] += delta;
                    v[c] -= delta;
                } else {
                    minv[c] -= delta;
                }
            }
            col0 = col1;
        } while (match[col0] != 0);
        do {
            const std::size_t col1 = way[col0];
            match[col0] = match[col1];
            col0 = col1;
        } while (col0 != 0);
    }

    std::vector<int> assign(n, 0);
    for (std::size_t c = 1; c <= n; ++c) assign[match[c] - 1] = static_cast<int>(c - 1);
    return assign;
}

std::vector<int> optimal_mapping(std::span<const int> pred, std::span<const int> truth) {
    check_labels(pred, truth);
    const std::size_t k = label_span(pred, truth);
    const Table counts = confusion_matrix(pred, truth, k);
    const double best = assignment_value(counts, max_weight_assignment(counts));

    std::vector<double> cluster_sizes(k, 0.0), class_sizes(k, 0.0);
    std::vector<std::size_t> rows;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t t = 0; t < k; ++t) {
            cluster_sizes[c] += counts[c][t];
            class_sizes[t] += counts[c][t];
        }
        if (cluster_sizes[c] > 0.0) rows.push_back(c);
    }

    // Empty clusters add nothing to ACC or F1, so the search only places the
    // non-empty ones. Every optimal placement is visited in lexicographic
    // order and the first with the highest macro-F1 wins.
    std::vector<int> assign(k, -1), chosen;
    std::vector<bool> taken(k, false);
    double best_f1 = -1.0;

    auto completion = [&](std::size_t depth) {
        std::vector<std::size_t> free_cols;
        for (std::size_t c = 0; c < k; ++c)
            if (!taken[c]) free_cols.push_back(c);
        Table w(free_cols.size(), std::vector<double>(free_cols.size(), 0.0));
        for (std::size_t a = depth; a < rows.size(); ++a)
            for (std::size_t b = 0; b < free_cols.size(); ++b) w[a - depth][b] = counts[rows[a]][free_cols[b]];
        return assignment_value(w, max_weight_assignment(w));
    };

    auto f1_of = [&]() {
        std::set<std::size_t> present;
        for (std::size_t t = 0; t < k; ++t)
            if (class_sizes[t] > 0.0) present.insert(t);
        std::vector<double> tp(k, 0.0), predicted(k, 0.0);
        for (std::size_t r : rows) {
            const auto m = static_cast<std::size_t>(assign[r]);
            present.insert(m);
            predicted[m] += cluster_sizes[r];
            tp[m] += counts[r][m];
        }
        double total = 0.0;
        for (std::size_t l : present) total += 2.0 * tp[l] / (predicted[l] + class_sizes[l]);
        return total / static_cast<double>(present.size());
    };

    auto search = [&](auto&& self, std::size_t depth, double pinned) -> void {
        if (depth == rows.size()) {
            const double f1 = f1_of();
            if (f1 > best_f1 + 1e-12) {
                best_f1 = f1;
                chosen = assign;
            }
            return;
        }
        const std::size_t r = rows[depth];
        for (std::size_t c = 0; c < k; ++c) {
            if (taken[c]) continue;
            taken[c] = true;
            assign[r] = static_cast<int>(c);
            // Counts are integers, so the optimum test is exact.
            if (pinned + counts[r][c] + completion(depth + 1) == best) self(self, depth + 1, pinned + counts[r][c]);
            taken[c] = false;
            assign[r] = -1;
        }
    };
    search(search, 0, 0.0);

    std::fill(taken.begin(), taken.end(), false);
    for (std::size_t r : rows) taken[static_cast<std::size_t>(chosen[r])] = true;
    std::size_t next = 0;
    for (std::size_t r = 0; r < k; ++r) {
        if (chosen[r] >= 0) continue;
        while (taken[next]) ++next;
        chosen[r] = static_cast<int>(next);
        taken[next] = true;
    }
    return chosen;
}

MetricReport clustering_metrics(std::span<const int> pred, std::span<const int> truth) {
    check_labels(pred, truth);
    const std::size_t k = label_span(pred, truth);
    const double n = static_cast<double>(pred.size());
    const Table counts = confusion_matrix(pred, truth, k);

    MetricReport report;
    report.mapping = optimal_mapping(pred, truth);
    report.acc = assignment_value(counts, report.mapping) / n;

    std::vector<double> cluster_sizes(k, 0.0), class_sizes(k, 0.0);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t t = 0; t < k; ++t) {
            cluster_sizes[c] += counts[c][t];
            class_sizes[t] += counts[c][t];
        }

    const bool identical = same_partition(pred, truth);

    const double h_pred = entropy(cluster_sizes, n);
    const double h_truth = entropy(class_sizes, n);
    double mi = 0.0;
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t t = 0; t < k; ++t)
            if (counts[c][t] > 0.0)
                mi += (counts[c][t] / n) * std::log(n * counts[c][t] / (cluster_sizes[c] * class_sizes[t]));
    const double mean_entropy = 0.5 * (h_pred + h_truth);
    if (mean_entropy <= 0.0) {
        report.nmi = identical ? 1.0 : 0.0;
    } else {
        report.nmi = std::clamp(mi / mean_entropy, 0.0, 1.0);
    }

    double index = 0.0, sum_pred = 0.0, sum_truth = 0.0;
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t t = 0; t < k; ++t) index += comb2(counts[c][t]);
    for (double s : cluster_sizes) sum_pred += comb2(s);
    for (double s : class_sizes) sum_truth += comb2(s);
    const double expected = sum_pred * sum_truth / comb2(n);
    const double max_index = 0.5 * (sum_pred + sum_truth);
    if (n < 2.0 || max_index == expected) {
        report.ari = identical ? 1.0 : 0.0;
    } else {
        report.ari = (index - expected) / (max_index - expected);
    }

    // Macro F1 over every label present in truth or in the mapped prediction.
    std::vector<double> tp(k, 0.0), predicted(k, 0.0);
    std::set<int> present(truth.begin(), truth.end());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const int mapped = report.mapping[pred[i]];
        present.insert(mapped);
        predicted[mapped] += 1.0;
        if (mapped == truth[i]) tp[mapped] += 1.0;
    }
    double f1_total = 0.0;
    for (int label : present) {
        const double precision = predicted[label] > 0.0 ? tp[label] / predicted[label] : 0.0;
        const double recall = class_sizes[label] > 0.0 ? tp[label] / class_sizes[label] : 0.0;
        if (precision + recall > 0.0) f1_total += 2.0 * precision * recall / (precision + recall);
    }
    report.f1 = f1_total / static_cast<double>(present.size());
    return report;
}

std::string to_json(const MetricReport& report) {
    nlohmann::json j{{"acc", report.acc}, {"nmi", report.nmi}, {"ari", report.ari}, {"f1", report.f1},
                     {"mapping", report.mapping}};
    return j.dump();
}

MetricReport metric_report_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    MetricReport r;
    r.acc = j.at("acc").get<double>();
    r.nmi = j.at("nmi").get<double>();
    r.ari = j.at("ari").get<double>();
    r.f1 = j.at("f1").get<double>();
    r.mapping = j.at("mapping").get<std::vector<int>>();
    return r;
}

}  // namespace scgc
