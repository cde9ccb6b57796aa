#pragma once

#include "gladformer/autodiff.hpp"
#include "gladformer/config.hpp"
#include "gladformer/params.hpp"
#include "gladformer/transformer.hpp"

namespace gladformer::nn {

// Local spectral message-passing branch: Beta band-pass embedding, K layers of
// low/high-pass propagation, mean readout. Runs on the base graph only. The
// stages are public so each can be exercised in isolation.
class LSBranch {
  public:
    LSBranch(ParamStore& store, const TrainConfig& cfg, int feat_dim);

    // concat of the M+1 precomputed bank outputs, then a linear projection
    ad::DTensor band_pass_embed(ad::Tape& tape, const Binding& bind,
                                const GraphCache& cache) const;
    // h_next = MLP(concat(F_L h, F_H h))
    ad::DTensor lowhigh_layer(ad::Tape& tape, const Binding& bind, int layer, ad::DTensor h_prev,
                              ad::DTensor f_low, ad::DTensor f_high) const;
    // concat of the K per-layer states, then a linear projection
    ad::DTensor combine_layers(ad::Tape& tape, const Binding& bind,
                               const std::vector<ad::DTensor>& states) const;
    // mean over nodes of concat(h_b, h_p), then the readout projection
    ad::DTensor local_readout(ad::Tape& tape, const Binding& bind, ad::DTensor h_b,
                              ad::DTensor h_p) const;

    // Returns H_loc (1 x out_width).
    ad::DTensor forward(ad::Tape& tape, const Binding& bind, const GraphCache& cache) const;

  private:
    TrainConfig cfg_;
    int feat_dim_;
    int band_w_, band_b_;
    std::vector<std::pair<int, int>> layer_wb_;  // per-layer MLP weight/bias
    int combine_w_, combine_b_;
    int readout_w_, readout_b_;
};

// Branch fusion and the classifier head producing p in (0, 1).
class FusionHead {
  public:
    FusionHead(ParamStore& store, const TrainConfig& cfg);

    ad::DTensor fuse(ad::Tape& tape, const Binding& bind, ad::DTensor h_gt,
                     ad::DTensor h_loc) const;
    ad::DTensor classify(ad::Tape& tape, const Binding& bind, ad::DTensor h_g) const;

  private:
    int fuse_w_, fuse_b_;
    int head_w1_, head_b1_, head_w2_, head_b2_;
};

}  // namespace gladformer::nn
