#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gladformer/errors.hpp"
#include "gladformer/loss.hpp"
#include "gladformer/metrics.hpp"
#include "gladformer/rng.hpp"

using namespace gladformer;

TEST_CASE("voce loss vanishes at confident correct predictions") {
    CHECK(loss::voce_loss(1.0 - 1e-15, 1, 0.2, 1.0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(loss::voce_loss(1e-15, 0, 0.2, 1.0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(loss::voce_loss(1.0 - 1e-15, 1, 0.0, 2.5) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("voce loss at the worked example") {
    // y=1, p=0.6, kappa=0.2, weight=1: -ln(0.2 + 0.8*0.6)/0.8 = -ln(0.68)/0.8
    const double expected = -std::log(0.68) / 0.8;
    CHECK(expected == doctest::Approx(0.4821).epsilon(1e-3));
    CHECK(loss::voce_loss(0.6, 1, 0.2, 1.0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("kappa zero reduces to weighted cross-entropy") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double p = rng.uniform(1e-6, 1.0 - 1e-6);
        const double w = rng.uniform(0.1, 4.0);
        const int y = rng.uniform() < 0.5 ? 0 : 1;
        const double ce = y == 1 ? -w * std::log(p) : -std::log(1.0 - p);
        CHECK(std::abs(loss::voce_loss(p, y, 0.0, w) - ce) <= 1e-12);
    }
}

TEST_CASE("voce rejects kappa outside [0, 1)") {
    CHECK_THROWS_AS(loss::voce_loss(0.5, 1, 1.0, 1.0), ArgError);
    CHECK_THROWS_AS(loss::voce_loss(0.5, 1, -0.1, 1.0), ArgError);
}

TEST_CASE("voce gradient stays bounded where cross-entropy explodes") {
    // y=1 at p=1: -1/(kappa + (1-kappa)) = -1
    CHECK(loss::voce_gradient(1.0, 1, 0.2, 1.0) == doctest::Approx(-1.0));
    // y=1 at p=0: -1/kappa = -5 for kappa=0.2, finite
    CHECK(loss::voce_gradient(0.0, 1, 0.2, 1.0) == doctest::Approx(-5.0));
    // kappa=0 recovers the plain cross-entropy gradient -w/p
    CHECK(loss::voce_gradient(0.25, 1, 0.0, 2.0) == doctest::Approx(-8.0));
}

TEST_CASE("voce gradient matches autodiff through the loss node") {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const double p = rng.uniform(1e-4, 1.0 - 1e-4);
        const double kappa = rng.uniform(0.0, 0.9);
        const double w = rng.uniform(0.2, 3.0);
        const int y = rng.uniform() < 0.5 ? 0 : 1;

        ad::Tape tape;
        std::vector<double> pv = {p};
        ad::DTensor leaf = tape.leaf({1, 1}, pv.data());
        ad::DTensor l = loss::voce_loss_node(tape, leaf, y, kappa, w);
        CHECK(l.value() == doctest::Approx(loss::voce_loss(p, y, kappa, w)).epsilon(1e-14));
        tape.backward(l);
        CHECK(std::abs(leaf.grad()[0] - loss::voce_gradient(p, y, kappa, w)) <= 1e-10);
    }
}

TEST_CASE("voce loss properties over a random grid") {
    Rng rng(11);
    const double kappa = 0.2;
    for (int i = 0; i < 500; ++i) {
        const double p = rng.uniform(1e-9, 1.0 - 1e-9);
        const double w = rng.uniform(0.0, 3.0);
        const int y = rng.uniform() < 0.5 ? 0 : 1;
        CHECK(loss::voce_loss(p, y, kappa, w) >= 0.0);
        // gradient bound |dl/dp| <= max(w, 1)/kappa
        CHECK(std::abs(loss::voce_gradient(p, y, kappa, w)) <= std::max(w, 1.0) / kappa + 1e-12);
    }
}

TEST_CASE("voce loss is monotone in p") {
    double prev1 = loss::voce_loss(0.01, 1, 0.2, 1.3);
    double prev0 = loss::voce_loss(0.01, 0, 0.2, 1.3);
    for (double p = 0.02; p < 1.0; p += 0.01) {
        const double l1 = loss::voce_loss(p, 1, 0.2, 1.3);
        const double l0 = loss::voce_loss(p, 0, 0.2, 1.3);
        CHECK(l1 < prev1);  // decreasing for anomalous targets
        CHECK(l0 > prev0);  // increasing for normal targets
        prev1 = l1;
        prev0 = l0;
    }
}

namespace {

data::GraphDataset labels_only(int n_anom, int n_norm) {
    data::GraphDataset ds;
    ds.d = 1;
    for (int i = 0; i < n_anom + n_norm; ++i) {
        data::Graph g;
        g.id = i;
        g.n = 1;
        g.x = Eigen::MatrixXd::Ones(1, 1);
        g.y = i < n_anom ? 1 : 0;
        ds.graphs.push_back(std::move(g));
    }
    return ds;
}

std::vector<int> all_indices(const data::GraphDataset& ds) {
    std::vector<int> idx(static_cast<std::size_t>(ds.size()));
    for (int i = 0; i < ds.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
    return idx;
}

}  // namespace

TEST_CASE("class ratio weight") {
    auto balanced = labels_only(50, 50);
    CHECK(loss::class_ratio_weight(balanced, all_indices(balanced)) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));

    auto skewed = labels_only(400, 1600);
    CHECK(loss::class_ratio_weight(skewed, all_indices(skewed)) ==
          doctest::Approx(std::log(5.0)).epsilon(1e-12));

    // 5.95% anomalous, the most imbalanced reference ratio
    auto rare = labels_only(119, 1881);
    CHECK(loss::class_ratio_weight(rare, all_indices(rare)) ==
          doctest::Approx(std::log(1.0 + 1881.0 / 119.0)).epsilon(1e-12));
    CHECK(loss::class_ratio_weight(rare, all_indices(rare)) == doctest::Approx(2.82).epsilon(1e-2));

    auto single = labels_only(10, 0);
    CHECK_THROWS_AS(loss::class_ratio_weight(single, all_indices(single)), ContractError);
}

TEST_CASE("auc on separable, tied, and mixed rankings") {
    CHECK(metrics::auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
    CHECK(metrics::auc({0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0}) == doctest::Approx(0.5));
    // two positive-negative pairs: one win, one loss
    CHECK(metrics::auc({0.9, 0.8, 0.3}, {1, 0, 1}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(metrics::auc({0.1, 0.2}, {1, 1}), MetricError);
}

TEST_CASE("auc is invariant under strictly monotone score transforms") {
    Rng rng(13);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 50; ++i) {
        scores.push_back(rng.uniform(-3.0, 3.0));
        labels.push_back(rng.uniform() < 0.3 ? 1 : 0);
    }
    labels[0] = 1;
    labels[1] = 0;
    const double base = metrics::auc(scores, labels);
    std::vector<double> warped = scores;
    for (auto& s : warped) s = std::exp(0.7 * s) + 2.0;
    CHECK(metrics::auc(warped, labels) == doctest::Approx(base).epsilon(1e-15));
}

TEST_CASE("macro f1 cases") {
    CHECK(metrics::macro_f1({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}) == doctest::Approx(1.0));
    // labels (1,0), predictions (1,1): class-1 F1 = 2/3, class-0 F1 = 0
    CHECK(metrics::macro_f1({0.9, 0.8}, {1, 0}) == doctest::Approx(1.0 / 3.0));

    SUBCASE("symmetric under swapping the positive class") {
        std::vector<double> scores = {0.9, 0.8, 0.3, 0.2, 0.7};
        std::vector<int> labels = {1, 0, 1, 0, 0};
        std::vector<double> flipped;
        std::vector<int> swapped;
        for (double s : scores) flipped.push_back(1.0 - s);
        for (int y : labels) swapped.push_back(1 - y);
        CHECK(metrics::macro_f1(scores, labels) ==
              doctest::Approx(metrics::macro_f1(flipped, swapped)).epsilon(1e-15));
    }
}

TEST_CASE("confusion counts partition the evaluated set") {
    Rng rng(17);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 64; ++i) {
        scores.push_back(rng.uniform());
        labels.push_back(rng.uniform() < 0.4 ? 1 : 0);
    }
    auto c = metrics::confusion_counts(scores, labels);
    CHECK(c.tp + c.fp + c.tn + c.fn == 64);
}

TEST_CASE("compute_metrics omits auc on single-class input") {
    auto m = metrics::compute_metrics({0.2, 0.7}, {0, 0});
    CHECK(!m.auc.has_value());
    CHECK(m.confusion.tn + m.confusion.fp == 2);
    auto j = metrics::metrics_to_json(m);
    CHECK(j.find("\"auc\":null") != std::string::npos);
}

TEST_CASE("metrics serialize as a json record") {
    auto m = metrics::compute_metrics({0.9, 0.1}, {1, 0});
    m.fold = 3;
    auto j = metrics::metrics_to_json(m);
    CHECK(j.find("\"auc\":1.0") != std::string::npos);
    CHECK(j.find("\"macro_f1\":1.0") != std::string::npos);
    CHECK(j.find("\"fold\":3") != std::string::npos);
    CHECK(j.find("\"tp\":1") != std::string::npos);
}
