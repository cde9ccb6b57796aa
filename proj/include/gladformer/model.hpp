#pragma once

#include <memory>
#include <vector>

#include "gladformer/localspec.hpp"
#include "gladformer/transformer.hpp"

namespace gladformer::nn {

// The full two-branch detector. Construction registers every parameter in a
// fixed order; call params().init(rng) before use.
class Model {
  public:
    Model(const TrainConfig& cfg, int feat_dim);

    struct Output {
        ad::DTensor p;    // anomaly probability, 1x1
        ad::DTensor h_g;  // fused graph representation, 1 x out_width
    };

    Output forward(ad::Tape& tape, const Binding& bind, const GraphCache& cache,
                   const std::vector<std::vector<double>>* dropout_masks = nullptr) const;

    // Convenience forward on a fresh private tape, no gradients.
    double predict(const GraphCache& cache) const;
    std::vector<double> embed(const GraphCache& cache) const;

    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }
    const TrainConfig& config() const { return cfg_; }
    int feat_dim() const { return feat_dim_; }

    const GTBranch& gt() const { return *gt_; }
    const LSBranch& ls() const { return *ls_; }
    const FusionHead& fusion() const { return *head_; }

  private:
    TrainConfig cfg_;
    int feat_dim_;
    ParamStore store_;
    std::unique_ptr<GTBranch> gt_;
    std::unique_ptr<LSBranch> ls_;
    std::unique_ptr<FusionHead> head_;
};

std::vector<GraphCache> build_caches(const data::GraphDataset& ds, const TrainConfig& cfg);

}  // namespace gladformer::nn
