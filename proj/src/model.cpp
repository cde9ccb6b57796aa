#include "gladformer/model.hpp"

namespace gladformer::nn {

Model::Model(const TrainConfig& cfg, int feat_dim) : cfg_(cfg), feat_dim_(feat_dim) {
    gt_ = std::make_unique<GTBranch>(store_, cfg, feat_dim);
    ls_ = std::make_unique<LSBranch>(store_, cfg, feat_dim);
    head_ = std::make_unique<FusionHead>(store_, cfg);
}

Model::Output Model::forward(ad::Tape& tape, const Binding& bind, const GraphCache& cache,
                             const std::vector<std::vector<double>>* dropout_masks) const {
    ad::DTensor h_gt = gt_->forward(tape, bind, cache, dropout_masks);
    ad::DTensor h_loc = ls_->forward(tape, bind, cache);
    ad::DTensor h_g = head_->fuse(tape, bind, h_gt, h_loc);
    ad::DTensor p = head_->classify(tape, bind, h_g);
    return {p, h_g};
}

double Model::predict(const GraphCache& cache) const {
    ad::Tape tape;
    Binding bind = bind_params(tape, store_);
    return forward(tape, bind, cache).p.value();
}

std::vector<double> Model::embed(const GraphCache& cache) const {
    ad::Tape tape;
    Binding bind = bind_params(tape, store_);
    Output out = forward(tape, bind, cache);
    const double* v = out.h_g.data();
    return std::vector<double>(v, v + out.h_g.shape().size());
}

std::vector<GraphCache> build_caches(const data::GraphDataset& ds, const TrainConfig& cfg) {
    std::vector<GraphCache> caches;
    caches.reserve(ds.graphs.size());
    for (const auto& g : ds.graphs) caches.push_back(build_graph_cache(g, cfg));
    return caches;
}

}  // namespace gladformer::nn
