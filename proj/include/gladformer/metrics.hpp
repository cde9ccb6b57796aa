#pragma once

#include <optional>
#include <string>
#include <vector>

namespace gladformer::metrics {

struct Confusion {
    long tp = 0, fp = 0, tn = 0, fn = 0;
};

// Probability that a random positive outranks a random negative; ties count
// one half. Throws MetricError when only one class is present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Unweighted mean of the two per-class F1 values at a fixed threshold;
// zero-division F1 is 0.
double macro_f1(const std::vector<double>& scores, const std::vector<int>& labels,
                double threshold = 0.5);

Confusion confusion_counts(const std::vector<double>& scores, const std::vector<int>& labels,
                           double threshold = 0.5);

struct Metrics {
    std::optional<double> auc;  // absent when the evaluated set is single-class
    double macro_f1 = 0.0;
    Confusion confusion;
    double threshold = 0.5;
    int fold = -1;
};

// AUC is omitted (not an error) when only one class is present.
Metrics compute_metrics(const std::vector<double>& scores, const std::vector<int>& labels,
                        double threshold = 0.5);

std::string metrics_to_json(const Metrics& m);

}  // namespace gladformer::metrics
