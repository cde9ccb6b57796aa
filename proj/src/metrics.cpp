#include "gladformer/metrics.hpp"

#include <algorithm>
#include <json.hpp>
#include <numeric>

#include "gladformer/errors.hpp"

namespace gladformer::metrics {

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw ContractError("auc: scores and labels differ in length");
    long n_pos = 0, n_neg = 0;
    for (int y : labels) (y == 1 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) throw MetricError("auc undefined: only one class present");

    // rank-based with average ranks for ties
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
        i = j + 1;
    }
    return (pos_rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

Confusion confusion_counts(const std::vector<double>& scores, const std::vector<int>& labels,
                           double threshold) {
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        if (labels[i] == 1)
            (pred ? c.tp : c.fn)++;
        else
            (pred ? c.fp : c.tn)++;
    }
    return c;
}

namespace {

double f1_from(long tp, long fp, long fn) {
    const long denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

double macro_f1(const std::vector<double>& scores, const std::vector<int>& labels,
                double threshold) {
    const Confusion c = confusion_counts(scores, labels, threshold);
    const double f1_pos = f1_from(c.tp, c.fp, c.fn);
    const double f1_neg = f1_from(c.tn, c.fn, c.fp);  // class 0 as the positive side
    return 0.5 * (f1_pos + f1_neg);
}

Metrics compute_metrics(const std::vector<double>& scores, const std::vector<int>& labels,
                        double threshold) {
    Metrics m;
    m.threshold = threshold;
    try {
        m.auc = auc(scores, labels);
    } catch (const MetricError&) {
        m.auc.reset();
    }
    m.macro_f1 = macro_f1(scores, labels, threshold);
    m.confusion = confusion_counts(scores, labels, threshold);
    return m;
}

std::string metrics_to_json(const Metrics& m) {
    nlohmann::json j;
    if (m.auc)
        j["auc"] = *m.auc;
    else
        j["auc"] = nullptr;
    j["macro_f1"] = m.macro_f1;
    j["confusion"] = {{"tp", m.confusion.tp},
                      {"fp", m.confusion.fp},
                      {"tn", m.confusion.tn},
                      {"fn", m.confusion.fn}};
    j["threshold"] = m.threshold;
    if (m.fold >= 0) j["fold"] = m.fold;
    return j.dump();
}

}  // namespace gladformer::metrics
