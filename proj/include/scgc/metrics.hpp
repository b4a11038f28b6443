#pragma once

#include <span>
#include <string>
#include <vector>

namespace scgc {

struct MetricReport {
    double acc = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
    double f1 = 0.0;
    std::vector<int> mapping;  // mapping[cluster] = class
};

/// Cluster -> class assignment maximizing matched count. The confusion matrix
/// is padded to K x K with K = 1 + max label over both inputs. Ties between
/// optimal assignments go to the highest macro-F1, then to the lexicographically
/// smallest placement of the non-empty clusters. Empty clusters take the
/// leftover classes in ascending order.
std::vector<int> optimal_mapping(std::span<const int> pred, std::span<const int> truth);

/// ACC and macro-F1 under optimal_mapping; NMI normalized by the arithmetic
/// mean of entropies; ARI with the usual expected-index correction.
/// Degenerate cases (zero entropy / zero ARI denominator) score 1 when the
/// partitions are identical and 0 otherwise.
MetricReport clustering_metrics(std::span<const int> pred, std::span<const int> truth);

/// Flat JSON object {"acc","nmi","ari","f1","mapping"}.
std::string to_json(const MetricReport& report);
MetricReport metric_report_from_json(const std::string& text);

/// Maximum-weight perfect matching on a square matrix (row -> column).
std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weight);

}  // namespace scgc
