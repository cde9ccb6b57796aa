#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gladformer/autodiff.hpp"
#include "gladformer/config.hpp"
#include "gladformer/graph.hpp"
#include "gladformer/params.hpp"

namespace gladformer::nn {

// Base graph plus one super-node (index n, appended last) connected to every
// base node. The leading n x n adjacency block is the base graph unchanged.
struct AugmentedGraph {
    int n = 0;  // base node count; super-node index == n
    Eigen::MatrixXd adjacency;             // (n+1) x (n+1)
    Eigen::VectorXd degrees;               // augmented degrees
    std::vector<Eigen::MatrixXd> rrwp;     // T slices on the augmented graph
};

AugmentedGraph add_supernode(const data::Graph& g, int T);

// Per-graph constants for the forward pass, all row-major and owned here so
// tapes can borrow them. Built once per graph per run; parameters never enter.
struct GraphCache {
    int id = 0;
    int y = 0;
    int n = 0;  // base node count
    int d = 0;  // feature dimension
    std::vector<double> x;          // n x d base features
    std::vector<double> rrwp_flat;  // (n+1)^2 x T augmented pair features
    std::vector<double> logdeg;     // (n+1) x hidden, rows log(1 + deg_i) replicated
    std::vector<double> rayleigh;   // 1 x d, from the base graph
    std::vector<double> bank;       // n x (M+1)d concatenated Beta bank outputs
    std::vector<double> f_low;      // n x n dense low-pass operator
    std::vector<double> f_high;     // n x n dense high-pass operator
};

GraphCache build_graph_cache(const data::Graph& g, const TrainConfig& cfg);

// Spectrum-enhanced graph transformer branch: initial embedding, degree
// scaling, L layers of RRWP-biased multi-head attention, super-node state
// combination across layers, and Rayleigh-quotient enhancement. The stages are
// public so each can be exercised in isolation.
class GTBranch {
  public:
    GTBranch(ParamStore& store, const TrainConfig& cfg, int feat_dim);

    // base features with the learnable super-node row appended
    ad::DTensor augmented_features(ad::Tape& tape, const Binding& bind,
                                   const GraphCache& cache) const;
    // h_i = relu(W x_i + b)
    ad::DTensor init_embed(ad::Tape& tape, const Binding& bind, ad::DTensor x_aug) const;
    // g_i = h_i (*) theta1 + log(1 + deg_i) * (h_i (*) theta2)
    ad::DTensor degree_scale(ad::Tape& tape, const Binding& bind, ad::DTensor h,
                             const GraphCache& cache) const;
    // one multi-head RRWP-biased attention block (heads concatenated, projected)
    ad::DTensor rrwp_mha(ad::Tape& tape, const Binding& bind, int layer, ad::DTensor states,
                         ad::DTensor rrwp, int nodes) const;
    // G' = Norm(MHA(G) + G); G_next = Norm(FFN(G')) + G'
    ad::DTensor gt_layer(ad::Tape& tape, const Binding& bind, int layer, ad::DTensor states,
                         ad::DTensor rrwp, int nodes,
                         const std::vector<double>* dropout_mask = nullptr) const;
    // concat of per-layer super-node states, then a linear projection
    ad::DTensor combine_supernode(ad::Tape& tape, const Binding& bind,
                                  const std::vector<ad::DTensor>& sup_states) const;
    // H_gt = MLP(concat(H_sup, MLP(rayleigh)))
    ad::DTensor spectrum_enhance(ad::Tape& tape, const Binding& bind, ad::DTensor h_sup,
                                 const GraphCache& cache) const;

    // Full branch: returns H_gt (1 x out_width). `dropout_masks`, when
    // non-null, must hold L keep/scale masks of (n+1) x hidden values.
    ad::DTensor forward(ad::Tape& tape, const Binding& bind, const GraphCache& cache,
                        const std::vector<std::vector<double>>* dropout_masks = nullptr) const;

  private:
    struct HeadIds {
        int wq, wk, wv, we, wa;
    };
    struct LayerIds {
        std::vector<HeadIds> heads;
        int wo, bo;
        int ln1_g, ln1_b, ln2_g, ln2_b;
        int ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    };

    TrainConfig cfg_;
    int feat_dim_;
    int head_width_;
    int embed_w_, embed_b_;
    int supernode_;
    int theta1_, theta2_;
    std::vector<LayerIds> layers_;
    int combine_w_, combine_b_;
    int rq_w_, rq_b_;
    int out_w_, out_b_;
};

}  // namespace gladformer::nn
