#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "gladformer/adam.hpp"
#include "gladformer/dataset.hpp"
#include "gladformer/errors.hpp"
#include "gladformer/train.hpp"

using namespace gladformer;
namespace fs = std::filesystem;

namespace {

TrainConfig tiny_config() {
    TrainConfig cfg;
    cfg.hidden = 8;
    cfg.out_width = 8;
    cfg.heads = 2;
    cfg.L = 1;
    cfg.T = 2;
    cfg.M = 1;
    cfg.K = 1;
    cfg.ffn_mult = 1;
    cfg.batch = 16;
    cfg.lr = 1e-2;
    cfg.max_epochs = 5;
    cfg.patience = 50;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("adam minimizes a quadratic") {
    nn::ParamStore store;
    const int wid = store.add("w", 1, 3);
    store[wid].value = {5.0, -4.0, 2.0};
    const std::vector<double> target = {1.0, 2.0, -1.0};

    nn::Adam adam(store, 0.1);
    nn::GradBuffer grads(store);
    for (int step = 0; step < 300; ++step) {
        grads.zero();
        for (int i = 0; i < 3; ++i)
            grads.grad(wid)[static_cast<std::size_t>(i)] =
                2.0 * (store[wid].value[static_cast<std::size_t>(i)] - target[static_cast<std::size_t>(i)]);
        adam.step(grads);
    }
    for (int i = 0; i < 3; ++i)
        CHECK(store[wid].value[static_cast<std::size_t>(i)] ==
              doctest::Approx(target[static_cast<std::size_t>(i)]).epsilon(1e-3));
    CHECK(adam.step_count() == 300);
}

TEST_CASE("training reduces the loss on synthetic data") {
    auto ds = data::generate_synthetic(60, 0.2, 4, 8, 11);
    auto cfg = tiny_config();
    cfg.max_epochs = 20;
    auto spec = data::make_holdout_split(ds, 0.70, 0.15, cfg.seed);
    auto caches = nn::build_caches(ds, cfg);
    auto res = train::train(cfg, ds, caches, spec.train, spec.val, spec.test, 99);

    REQUIRE(res.report.history.size() >= 2);
    CHECK(res.report.history.back().train_loss < res.report.history.front().train_loss);
    CHECK(res.report.test.confusion.tp + res.report.test.confusion.fp +
              res.report.test.confusion.tn + res.report.test.confusion.fn ==
          static_cast<long>(spec.test.size()));
}

TEST_CASE("zero max_epochs returns initialized params and empty history") {
    auto ds = data::generate_synthetic(30, 0.2, 4, 6, 13);
    auto cfg = tiny_config();
    cfg.max_epochs = 0;
    auto spec = data::make_holdout_split(ds, 0.70, 0.15, cfg.seed);
    auto caches = nn::build_caches(ds, cfg);
    auto res = train::train(cfg, ds, caches, spec.train, spec.val, spec.test, 99);
    CHECK(res.report.history.empty());
    CHECK(res.report.best_epoch == -1);

    // params equal a fresh seeded initialization
    nn::Model fresh(cfg, ds.d);
    fresh.params().init(Rng(99).fork(1));
    for (int i = 0; i < fresh.params().size(); ++i)
        CHECK(fresh.params()[i].value == res.model.params()[i].value);
}

TEST_CASE("identical config and seed give bit-identical runs") {
    auto ds = data::generate_synthetic(40, 0.2, 4, 6, 17);
    auto cfg = tiny_config();
    cfg.max_epochs = 3;
    auto run = [&]() { return train::train_holdout(cfg, ds); };
    auto r1 = run();
    auto r2 = run();
    REQUIRE(r1.folds.size() == 1);
    REQUIRE(r1.folds[0].history.size() == r2.folds[0].history.size());
    for (std::size_t i = 0; i < r1.folds[0].history.size(); ++i) {
        CHECK(r1.folds[0].history[i].train_loss == r2.folds[0].history[i].train_loss);
        CHECK(r1.folds[0].history[i].val_auc == r2.folds[0].history[i].val_auc);
    }
    CHECK(r1.folds[0].test.macro_f1 == r2.folds[0].test.macro_f1);
}

TEST_CASE("multi-threaded batches are deterministic for a fixed thread count") {
    auto ds = data::generate_synthetic(24, 0.25, 4, 6, 19);
    auto cfg = tiny_config();
    cfg.max_epochs = 2;
    cfg.threads = 3;
    auto r1 = train::train_holdout(cfg, ds);
    auto r2 = train::train_holdout(cfg, ds);
    for (std::size_t i = 0; i < r1.folds[0].history.size(); ++i)
        CHECK(r1.folds[0].history[i].train_loss == r2.folds[0].history[i].train_loss);
}

TEST_CASE("a memorized toy run reaches train AUC 1.0") {
    auto ds = data::generate_synthetic(10, 0.3, 4, 6, 23);
    auto cfg = tiny_config();
    cfg.max_epochs = 150;
    cfg.patience = 150;
    cfg.batch = 10;
    std::vector<int> all;
    for (int i = 0; i < ds.size(); ++i) all.push_back(i);
    auto caches = nn::build_caches(ds, cfg);
    auto res = train::train(cfg, ds, caches, all, {}, {}, 3);
    auto m = train::evaluate(res.model, caches, all);
    REQUIRE(m.auc.has_value());
    CHECK(*m.auc == doctest::Approx(1.0));
}

TEST_CASE("evaluate validates its inputs") {
    auto ds = data::generate_synthetic(10, 0.3, 4, 6, 29);
    auto cfg = tiny_config();
    nn::Model model(cfg, ds.d);
    model.params().init(Rng(1));
    auto caches = nn::build_caches(ds, cfg);
    CHECK_THROWS_AS(train::evaluate(model, caches, {}), ContractError);

    // single-class set: AUC omitted, run continues
    std::vector<int> normals;
    for (int i = 0; i < ds.size(); ++i)
        if (ds.graphs[static_cast<std::size_t>(i)].y == 0) normals.push_back(i);
    auto m = train::evaluate(model, caches, normals);
    CHECK(!m.auc.has_value());
}

TEST_CASE("training requires both classes") {
    auto ds = data::generate_synthetic(10, 0.3, 4, 6, 31);
    auto cfg = tiny_config();
    auto caches = nn::build_caches(ds, cfg);
    std::vector<int> normals;
    for (int i = 0; i < ds.size(); ++i)
        if (ds.graphs[static_cast<std::size_t>(i)].y == 0) normals.push_back(i);
    CHECK_THROWS_AS(train::train(cfg, ds, caches, normals, {}, {}, 1), ContractError);
}

TEST_CASE("diverged training raises a TrainError with the epoch") {
    auto ds = data::generate_synthetic(12, 0.25, 4, 6, 37);
    auto cfg = tiny_config();
    const bool was = ad::Tape::check_finite();
    ad::Tape::set_check_finite(false);
    auto caches = nn::build_caches(ds, cfg);
    std::vector<int> all;
    for (int i = 0; i < ds.size(); ++i) all.push_back(i);

    // warm-start from a corrupted checkpoint: a NaN logit bias makes every
    // prediction, and therefore the batch loss, NaN
    nn::Model donor(cfg, ds.d);
    donor.params().init(Rng(1));
    auto& b2 = donor.params()[donor.params().find("head.b2")];
    b2.value[0] = std::nan("");
    try {
        train::train(cfg, ds, caches, all, {}, {}, 1, -1, &donor.params());
        FAIL("expected TrainError");
    } catch (const TrainError& e) {
        CHECK(e.epoch == 1);
    }
    ad::Tape::set_check_finite(was);
}

TEST_CASE("warm start resumes from the given parameters") {
    auto ds = data::generate_synthetic(20, 0.25, 4, 6, 61);
    auto cfg = tiny_config();
    cfg.max_epochs = 0;
    auto caches = nn::build_caches(ds, cfg);
    std::vector<int> all;
    for (int i = 0; i < ds.size(); ++i) all.push_back(i);

    nn::Model donor(cfg, ds.d);
    donor.params().init(Rng(1234));
    auto res = train::train(cfg, ds, caches, all, {}, {}, 9, -1, &donor.params());
    for (int i = 0; i < donor.params().size(); ++i)
        CHECK(res.model.params()[i].value == donor.params()[i].value);
}

TEST_CASE("early stopping returns the best validation checkpoint") {
    auto ds = data::generate_synthetic(40, 0.25, 4, 7, 41);
    auto cfg = tiny_config();
    cfg.max_epochs = 30;
    cfg.patience = 5;
    auto spec = data::make_holdout_split(ds, 0.6, 0.25, cfg.seed);
    auto caches = nn::build_caches(ds, cfg);
    auto res = train::train(cfg, ds, caches, spec.train, spec.val, spec.test, 55);

    double best_seen = -1.0;
    for (const auto& r : res.report.history)
        if (r.val_auc) best_seen = std::max(best_seen, *r.val_auc);
    auto val_now = train::evaluate(res.model, caches, spec.val);
    REQUIRE(val_now.auc.has_value());
    CHECK(*val_now.auc == doctest::Approx(best_seen).epsilon(1e-12));
}

TEST_CASE("cross validation covers the dataset and aggregates exactly") {
    auto ds = data::generate_synthetic(60, 0.2, 4, 7, 43);
    auto cfg = tiny_config();
    cfg.max_epochs = 4;
    cfg.folds = 4;
    auto report = train::cross_validate(cfg, ds);
    REQUIRE(report.folds.size() == 4);

    double sum_auc = 0.0, min_auc = 2.0, max_auc = -1.0;
    for (const auto& f : report.folds) {
        REQUIRE(f.test.auc.has_value());
        sum_auc += *f.test.auc;
        min_auc = std::min(min_auc, *f.test.auc);
        max_auc = std::max(max_auc, *f.test.auc);
    }
    REQUIRE(report.mean_auc.has_value());
    CHECK(*report.mean_auc == doctest::Approx(sum_auc / 4.0).epsilon(1e-15));
    CHECK(*report.mean_auc >= min_auc);
    CHECK(*report.mean_auc <= max_auc);
}

TEST_CASE("checkpoints round-trip through json bit-exactly") {
    auto ds = data::generate_synthetic(10, 0.3, 4, 6, 47);
    auto cfg = tiny_config();
    nn::Model model(cfg, ds.d);
    model.params().init(Rng(3));
    auto caches = nn::build_caches(ds, cfg);
    const double before = model.predict(caches[0]);

    const auto path = fs::temp_directory_path() / "gladformer_ckpt_test.json";
    nn::save_checkpoint(model.params(), path.string());
    nn::Model other(cfg, ds.d);
    nn::load_checkpoint(other.params(), path.string());
    CHECK(other.predict(caches[0]) == before);
    fs::remove(path);

    SUBCASE("shape or name mismatch is rejected") {
        TrainConfig cfg2 = cfg;
        cfg2.hidden = 4;
        nn::Model wrong(cfg2, ds.d);
        nn::save_checkpoint(model.params(), path.string());
        CHECK_THROWS_AS(nn::load_checkpoint(wrong.params(), path.string()), FormatError);
        fs::remove(path);
    }
}

TEST_CASE("run report serializes with curves") {
    auto ds = data::generate_synthetic(30, 0.2, 4, 6, 53);
    auto cfg = tiny_config();
    cfg.max_epochs = 2;
    auto report = train::train_holdout(cfg, ds);
    auto j = train::report_to_json(report);
    CHECK(j.find("\"mode\": \"holdout\"") != std::string::npos);
    CHECK(j.find("\"mean_macro_f1\"") != std::string::npos);

    const auto dir = fs::temp_directory_path() / "gladformer_report_test";
    train::write_report(report, dir.string());
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "curves.csv"));
    std::ifstream curves(dir / "curves.csv");
    std::string header;
    std::getline(curves, header);
    CHECK(header == "epoch,train_loss,val_auc,val_f1");
    fs::remove_all(dir);
}
