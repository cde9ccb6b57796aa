#include "gladformer/train.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "gladformer/adam.hpp"
#include "gladformer/dataset.hpp"
#include "gladformer/errors.hpp"
#include "gladformer/loss.hpp"
#include "gladformer/rng.hpp"

namespace gladformer::train {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<int> labels_of(const data::GraphDataset& ds, const std::vector<int>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(ds.graphs[static_cast<std::size_t>(i)].y);
    return out;
}

// dropout keep/scale masks for one graph forward, L masks of (n+1) x hidden
std::vector<std::vector<double>> make_dropout_masks(const TrainConfig& cfg, int n1, Rng rng) {
    const double keep = 1.0 - cfg.dropout;
    std::vector<std::vector<double>> masks(static_cast<std::size_t>(cfg.L));
    for (auto& m : masks) {
        m.resize(static_cast<std::size_t>(n1) * cfg.hidden);
        for (auto& v : m) v = rng.uniform() < keep ? 1.0 / keep : 0.0;
    }
    return masks;
}

}  // namespace

metrics::Metrics evaluate(const nn::Model& model, const std::vector<nn::GraphCache>& caches,
                          const std::vector<int>& indices) {
    if (indices.empty()) throw ContractError("evaluate: empty index set");
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(indices.size());
    labels.reserve(indices.size());
    for (int i : indices) {
        const auto& cache = caches[static_cast<std::size_t>(i)];
        scores.push_back(model.predict(cache));
        labels.push_back(cache.y);
    }
    return metrics::compute_metrics(scores, labels);
}

TrainResult train(const TrainConfig& cfg, const data::GraphDataset& ds,
                  const std::vector<nn::GraphCache>& caches, const std::vector<int>& train_idx,
                  const std::vector<int>& val_idx, const std::vector<int>& test_idx,
                  std::uint64_t seed, int fold_index, const nn::ParamStore* warm_start) {
    cfg.validate();
    if (train_idx.empty()) throw ContractError("train: empty training set");
    {
        bool has0 = false, has1 = false;
        for (int i : train_idx) (ds.graphs[static_cast<std::size_t>(i)].y ? has1 : has0) = true;
        if (!has0 || !has1) throw ContractError("train: both classes required in training part");
    }

    const auto t0 = std::chrono::steady_clock::now();
    const double weight = loss::class_ratio_weight(ds, train_idx);

    nn::Model model(cfg, ds.d);
    Rng master(seed);
    model.params().init(master.fork(1));
    if (warm_start) {
        if (warm_start->size() != model.params().size())
            throw ContractError("train: warm start parameter count mismatch");
        for (int i = 0; i < model.params().size(); ++i) {
            if (!((*warm_start)[i].shape == model.params()[i].shape))
                throw ContractError("train: warm start shape mismatch for " +
                                    model.params()[i].name);
            model.params()[i].value = (*warm_start)[i].value;
        }
    }
    Rng shuffle_rng = master.fork(2);

    TrainResult result{std::move(model), {}};
    nn::Model& m = result.model;
    FoldReport& report = result.report;
    report.fold = fold_index;

    if (cfg.max_epochs == 0) {
        if (!test_idx.empty()) report.test = evaluate(m, caches, test_idx);
        report.seconds = seconds_since(t0);
        return result;
    }

    nn::Adam adam(m.params(), cfg.lr);
    const int n_threads = std::max(1, cfg.threads);
    std::vector<nn::GradBuffer> thread_grads;
    thread_grads.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) thread_grads.emplace_back(m.params());
    nn::GradBuffer total_grads(m.params());

    std::vector<double> best_values;
    double best_score = -1.0;
    int best_epoch = -1;
    int epochs_since_best = 0;

    std::vector<int> order = train_idx;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;

        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
            const std::size_t chunk = end - start;
            const double scale = 1.0 / static_cast<double>(chunk);

            std::vector<double> losses(chunk, 0.0);
            for (auto& g : thread_grads) g.zero();

            std::exception_ptr error;
            std::mutex error_mu;
            auto worker = [&](int tid) {
                try {
                    for (std::size_t k = static_cast<std::size_t>(tid); k < chunk;
                         k += static_cast<std::size_t>(n_threads)) {
                        const int gi = order[start + k];
                        const auto& cache = caches[static_cast<std::size_t>(gi)];
                        ad::Tape tape;
                        nn::Binding bind = bind_params(tape, m.params());
                        std::vector<std::vector<double>> masks;
                        const std::vector<std::vector<double>>* mask_ptr = nullptr;
                        if (cfg.dropout > 0.0) {
                            Rng drop_rng(splitmix_combine(seed, epoch, gi));
                            masks = make_dropout_masks(cfg, cache.n + 1, drop_rng);
                            mask_ptr = &masks;
                        }
                        auto out = m.forward(tape, bind, cache, mask_ptr);
                        ad::DTensor l =
                            loss::voce_loss_node(tape, out.p, cache.y, cfg.kappa, weight);
                        losses[k] = l.value();
                        tape.backward(l);
                        thread_grads[static_cast<std::size_t>(tid)].accumulate(tape, bind, scale);
                    }
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                }
            };

            if (n_threads == 1) {
                worker(0);
            } else {
                std::vector<std::thread> pool;
                pool.reserve(static_cast<std::size_t>(n_threads));
                for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
                for (auto& th : pool) th.join();
            }
            if (error) std::rethrow_exception(error);

            double batch_loss = 0.0;
            for (double l : losses) batch_loss += l;
            if (!std::isfinite(batch_loss)) throw TrainError("training loss is not finite", epoch);
            epoch_loss += batch_loss;

            total_grads.zero();
            for (const auto& g : thread_grads) total_grads.add(g);
            adam.step(total_grads);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = epoch_loss / static_cast<double>(order.size());

        double score = -rec.train_loss;  // fallback when no validation part
        if (!val_idx.empty()) {
            const auto vm = evaluate(m, caches, val_idx);
            rec.val_auc = vm.auc;
            rec.val_f1 = vm.macro_f1;
            score = vm.auc.value_or(vm.macro_f1);
        }
        report.history.push_back(rec);

        if (score > best_score) {
            best_score = score;
            best_epoch = epoch;
            epochs_since_best = 0;
            best_values.clear();
            for (const auto& p : m.params().all())
                best_values.insert(best_values.end(), p.value.begin(), p.value.end());
        } else if (++epochs_since_best >= cfg.patience) {
            break;
        }
    }

    if (best_epoch > 0) {
        std::size_t off = 0;
        for (auto& p : m.params().all()) {
            std::copy(best_values.begin() + static_cast<std::ptrdiff_t>(off),
                      best_values.begin() + static_cast<std::ptrdiff_t>(off + p.value.size()),
                      p.value.begin());
            off += p.value.size();
        }
    }
    report.best_epoch = best_epoch;

    if (!test_idx.empty()) {
        report.test = evaluate(m, caches, test_idx);
        report.test.fold = fold_index;
    }
    report.seconds = seconds_since(t0);
    return result;
}

namespace {

void aggregate(RunReport& report) {
    std::vector<double> aucs, f1s;
    for (const auto& f : report.folds) {
        if (f.test.auc) aucs.push_back(*f.test.auc);
        f1s.push_back(f.test.macro_f1);
    }
    auto mean_std = [](const std::vector<double>& v) -> std::pair<double, double> {
        if (v.empty()) return {0.0, 0.0};
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(v.size());
        return {mean, std::sqrt(var)};
    };
    if (!aucs.empty()) {
        auto [ma, sa] = mean_std(aucs);
        report.mean_auc = ma;
        report.std_auc = sa;
    }
    auto [mf, sf] = mean_std(f1s);
    report.mean_f1 = mf;
    report.std_f1 = sf;
}

// stratified carve of a validation subset out of a training complement
std::pair<std::vector<int>, std::vector<int>> carve_validation(const data::GraphDataset& ds,
                                                               const std::vector<int>& pool,
                                                               double val_frac, Rng rng) {
    std::array<std::vector<int>, 2> cls;
    for (int i : pool) cls[static_cast<std::size_t>(ds.graphs[static_cast<std::size_t>(i)].y)].push_back(i);
    std::vector<int> tr, va;
    for (auto& members : cls) {
        rng.shuffle(members);
        int n_val = static_cast<int>(std::lround(val_frac * static_cast<double>(members.size())));
        // keep at least one member in training; give up the val slot if needed
        n_val = std::min(n_val, static_cast<int>(members.size()) - 1);
        for (std::size_t i = 0; i < members.size(); ++i)
            (static_cast<int>(i) < n_val ? va : tr).push_back(members[i]);
    }
    std::sort(tr.begin(), tr.end());
    std::sort(va.begin(), va.end());
    return {tr, va};
}

}  // namespace

RunReport cross_validate(const TrainConfig& cfg, const data::GraphDataset& ds) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const auto spec = data::make_kfold_split(ds, cfg.folds, cfg.seed);
    const auto caches = nn::build_caches(ds, cfg);

    RunReport report;
    report.config = cfg;
    report.dataset = ds.name;
    report.mode = "kfold";

    Rng master(cfg.seed);
    for (int f = 0; f < cfg.folds; ++f) {
        std::vector<int> pool;
        for (int g = 0; g < cfg.folds; ++g)
            if (g != f)
                pool.insert(pool.end(), spec.folds[static_cast<std::size_t>(g)].begin(),
                            spec.folds[static_cast<std::size_t>(g)].end());
        auto [tr, va] = carve_validation(ds, pool, cfg.val_frac,
                                         master.fork(3000 + static_cast<std::uint64_t>(f)));
        auto res = train(cfg, ds, caches, tr, va, spec.folds[static_cast<std::size_t>(f)],
                         splitmix_combine(cfg.seed, 1000, f), f);
        report.folds.push_back(std::move(res.report));
    }
    aggregate(report);
    report.wall_seconds = seconds_since(t0);
    return report;
}

RunReport train_holdout(const TrainConfig& cfg, const data::GraphDataset& ds) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const auto spec = data::make_holdout_split(ds, cfg.train_frac, cfg.val_frac, cfg.seed);
    const auto caches = nn::build_caches(ds, cfg);

    RunReport report;
    report.config = cfg;
    report.dataset = ds.name;
    report.mode = "holdout";
    auto res = train(cfg, ds, caches, spec.train, spec.val, spec.test,
                     splitmix_combine(cfg.seed, 1000, 0), 0);
    report.folds.push_back(std::move(res.report));
    aggregate(report);
    report.wall_seconds = seconds_since(t0);
    return report;
}

namespace {

nlohmann::json config_to_json(const TrainConfig& c) {
    return {{"T", c.T},
            {"L", c.L},
            {"M", c.M},
            {"K", c.K},
            {"hidden", c.hidden},
            {"out_width", c.out_width},
            {"heads", c.heads},
            {"ffn_mult", c.ffn_mult},
            {"psi", c.psi},
            {"dropout", c.dropout},
            {"kappa", c.kappa},
            {"lr", c.lr},
            {"batch", c.batch},
            {"max_epochs", c.max_epochs},
            {"patience", c.patience},
            {"seed", c.seed},
            {"threads", c.threads},
            {"downsample", c.downsample},
            {"downsample_fraction", c.downsample_fraction},
            {"split_mode", c.split_mode},
            {"folds", c.folds},
            {"train_frac", c.train_frac},
            {"val_frac", c.val_frac}};
}

nlohmann::json fold_to_json(const FoldReport& f) {
    nlohmann::json j;
    j["fold"] = f.fold;
    j["best_epoch"] = f.best_epoch;
    j["seconds"] = f.seconds;
    j["test"] = nlohmann::json::parse(metrics::metrics_to_json(f.test));
    return j;
}

}  // namespace

std::string report_to_json(const RunReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["dataset"] = report.dataset;
    j["mode"] = report.mode;
    j["config"] = config_to_json(report.config);
    j["folds"] = nlohmann::json::array();
    for (const auto& f : report.folds) j["folds"].push_back(fold_to_json(f));
    if (report.mean_auc) {
        j["mean_auc"] = *report.mean_auc;
        j["std_auc"] = *report.std_auc;
    } else {
        j["mean_auc"] = nullptr;
        j["std_auc"] = nullptr;
    }
    j["mean_macro_f1"] = report.mean_f1;
    j["std_macro_f1"] = report.std_f1;
    j["wall_seconds"] = report.wall_seconds;
    return j.dump(2);
}

void write_curves_csv(const FoldReport& fold, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write " + path);
    out << "epoch,train_loss,val_auc,val_f1\n";
    for (const auto& r : fold.history) {
        out << r.epoch << "," << r.train_loss << ",";
        if (r.val_auc) out << *r.val_auc;
        out << "," << r.val_f1 << "\n";
    }
}

void write_report(const RunReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(std::filesystem::path(out_dir) / "report.json");
        if (!out) throw IngestError("cannot write report.json under " + out_dir);
        out << report_to_json(report) << "\n";
    }
    for (const auto& f : report.folds) {
        const std::string name =
            report.folds.size() == 1 ? "curves.csv" : "curves_fold" + std::to_string(f.fold) + ".csv";
        write_curves_csv(f, (std::filesystem::path(out_dir) / name).string());
    }
}

}  // namespace gladformer::train
