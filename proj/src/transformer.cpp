#include "gladformer/transformer.hpp"

#include <cmath>
#include <string>

#include "gladformer/errors.hpp"
#include "gladformer/spectral.hpp"

namespace gladformer::nn {

AugmentedGraph add_supernode(const data::Graph& g, int T) {
    AugmentedGraph aug;
    aug.n = g.n;
    const int n1 = g.n + 1;
    aug.adjacency = Eigen::MatrixXd::Zero(n1, n1);
    aug.adjacency.topLeftCorner(g.n, g.n) = spectral::adjacency(g);
    for (int i = 0; i < g.n; ++i) {
        aug.adjacency(g.n, i) = 1.0;
        aug.adjacency(i, g.n) = 1.0;
    }
    aug.degrees = aug.adjacency.rowwise().sum();
    aug.rrwp = spectral::rrwp_from_adjacency(aug.adjacency, T);
    return aug;
}

GraphCache build_graph_cache(const data::Graph& g, const TrainConfig& cfg) {
    GraphCache c;
    c.id = g.id;
    c.y = g.y;
    c.n = g.n;
    c.d = static_cast<int>(g.x.cols());

    c.x.resize(static_cast<std::size_t>(g.n) * c.d);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < c.d; ++j) c.x[static_cast<std::size_t>(i * c.d + j)] = g.x(i, j);

    const AugmentedGraph aug = add_supernode(g, cfg.T);
    const int n1 = g.n + 1;
    c.rrwp_flat.resize(static_cast<std::size_t>(n1) * n1 * cfg.T);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n1; ++j)
            for (int t = 0; t < cfg.T; ++t)
                c.rrwp_flat[static_cast<std::size_t>((i * n1 + j) * cfg.T + t)] =
                    aug.rrwp[static_cast<std::size_t>(t)](i, j);

    c.logdeg.resize(static_cast<std::size_t>(n1) * cfg.hidden);
    for (int i = 0; i < n1; ++i) {
        const double v = std::log1p(aug.degrees(i));
        for (int j = 0; j < cfg.hidden; ++j)
            c.logdeg[static_cast<std::size_t>(i * cfg.hidden + j)] = v;
    }

    const Eigen::MatrixXd lap = spectral::normalized_laplacian(g);
    const Eigen::VectorXd ray = spectral::rayleigh_vector(g.x, lap);
    c.rayleigh.assign(ray.data(), ray.data() + ray.size());

    const auto bank = spectral::beta_bank(lap, cfg.M, g.x);
    const int bands = cfg.M + 1;
    c.bank.resize(static_cast<std::size_t>(g.n) * bands * c.d);
    for (int i = 0; i < g.n; ++i)
        for (int m = 0; m < bands; ++m)
            for (int j = 0; j < c.d; ++j)
                c.bank[static_cast<std::size_t>(i * bands * c.d + m * c.d + j)] =
                    bank[static_cast<std::size_t>(m)](i, j);

    Eigen::MatrixXd f_low = -lap;
    f_low.diagonal().array() += cfg.psi + 1.0;
    Eigen::MatrixXd f_high = lap;
    f_high.diagonal().array() += cfg.psi - 1.0;
    c.f_low.resize(static_cast<std::size_t>(g.n) * g.n);
    c.f_high.resize(static_cast<std::size_t>(g.n) * g.n);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            c.f_low[static_cast<std::size_t>(i * g.n + j)] = f_low(i, j);
            c.f_high[static_cast<std::size_t>(i * g.n + j)] = f_high(i, j);
        }
    return c;
}

GTBranch::GTBranch(ParamStore& store, const TrainConfig& cfg, int feat_dim)
    : cfg_(cfg), feat_dim_(feat_dim) {
    if (cfg.hidden % cfg.heads != 0)
        throw ArgError("head count " + std::to_string(cfg.heads) + " must divide hidden width " +
                       std::to_string(cfg.hidden));
    head_width_ = cfg.hidden / cfg.heads;

    embed_w_ = store.add("gt.embed.w", feat_dim, cfg.hidden);
    embed_b_ = store.add("gt.embed.b", 1, cfg.hidden, InitKind::kZero);
    supernode_ = store.add("gt.supernode", 1, feat_dim);
    theta1_ = store.add("gt.theta1", 1, cfg.hidden, InitKind::kOne);
    theta2_ = store.add("gt.theta2", 1, cfg.hidden, InitKind::kZero);

    layers_.resize(static_cast<std::size_t>(cfg.L));
    for (int l = 0; l < cfg.L; ++l) {
        auto& lay = layers_[static_cast<std::size_t>(l)];
        const std::string pfx = "gt.layer" + std::to_string(l) + ".";
        for (int h = 0; h < cfg.heads; ++h) {
            const std::string hp = pfx + "head" + std::to_string(h) + ".";
            HeadIds ids;
            ids.wq = store.add(hp + "wq", cfg.hidden, head_width_);
            ids.wk = store.add(hp + "wk", cfg.hidden, head_width_);
            ids.wv = store.add(hp + "wv", cfg.hidden, head_width_);
            ids.we = store.add(hp + "we", cfg.T, head_width_);
            ids.wa = store.add(hp + "wa", head_width_, 1);
            lay.heads.push_back(ids);
        }
        lay.wo = store.add(pfx + "wo", cfg.hidden, cfg.hidden);
        lay.bo = store.add(pfx + "bo", 1, cfg.hidden, InitKind::kZero);
        lay.ln1_g = store.add(pfx + "ln1.gain", 1, cfg.hidden, InitKind::kOne);
        lay.ln1_b = store.add(pfx + "ln1.bias", 1, cfg.hidden, InitKind::kZero);
        lay.ln2_g = store.add(pfx + "ln2.gain", 1, cfg.hidden, InitKind::kOne);
        lay.ln2_b = store.add(pfx + "ln2.bias", 1, cfg.hidden, InitKind::kZero);
        const int ffn = cfg.ffn_mult * cfg.hidden;
        lay.ffn_w1 = store.add(pfx + "ffn.w1", cfg.hidden, ffn);
        lay.ffn_b1 = store.add(pfx + "ffn.b1", 1, ffn, InitKind::kZero);
        lay.ffn_w2 = store.add(pfx + "ffn.w2", ffn, cfg.hidden);
        lay.ffn_b2 = store.add(pfx + "ffn.b2", 1, cfg.hidden, InitKind::kZero);
    }

    combine_w_ = store.add("gt.combine.w", cfg.L * cfg.hidden, cfg.hidden);
    combine_b_ = store.add("gt.combine.b", 1, cfg.hidden, InitKind::kZero);
    rq_w_ = store.add("gt.rq.w", feat_dim, cfg.hidden);
    rq_b_ = store.add("gt.rq.b", 1, cfg.hidden, InitKind::kZero);
    out_w_ = store.add("gt.out.w", 2 * cfg.hidden, cfg.out_width);
    out_b_ = store.add("gt.out.b", 1, cfg.out_width, InitKind::kZero);
}

ad::DTensor GTBranch::augmented_features(ad::Tape& tape, const Binding& bind,
                                         const GraphCache& cache) const {
    ad::DTensor x = tape.constant({cache.n, cache.d}, cache.x.data());
    return tape.concat_rows({x, bind.leaves[static_cast<std::size_t>(supernode_)]});
}

ad::DTensor GTBranch::init_embed(ad::Tape& tape, const Binding& bind, ad::DTensor x_aug) const {
    auto P = [&](int id) { return bind.leaves[static_cast<std::size_t>(id)]; };
    return tape.relu(tape.rowvec_add(tape.matmul(x_aug, P(embed_w_)), P(embed_b_)));
}

ad::DTensor GTBranch::degree_scale(ad::Tape& tape, const Binding& bind, ad::DTensor h,
                                   const GraphCache& cache) const {
    auto P = [&](int id) { return bind.leaves[static_cast<std::size_t>(id)]; };
    ad::DTensor log_deg = tape.constant({cache.n + 1, cfg_.hidden}, cache.logdeg.data());
    return tape.add(tape.rowvec_mul(h, P(theta1_)),
                    tape.mul(tape.rowvec_mul(h, P(theta2_)), log_deg));
}

ad::DTensor GTBranch::rrwp_mha(ad::Tape& tape, const Binding& bind, int layer,
                               ad::DTensor states, ad::DTensor rrwp, int nodes) const {
    auto P = [&](int id) { return bind.leaves[static_cast<std::size_t>(id)]; };
    const auto& lay = layers_[static_cast<std::size_t>(layer)];
    std::vector<ad::DTensor> head_outs;
    head_outs.reserve(lay.heads.size());
    for (const auto& h : lay.heads) {
        ad::DTensor q = tape.matmul(states, P(h.wq));
        ad::DTensor k = tape.matmul(states, P(h.wk));
        ad::DTensor v = tape.matmul(states, P(h.wv));
        ad::DTensor pe = tape.matmul(rrwp, P(h.we));
        ad::DTensor s = tape.pair_score(q, k, pe);
        ad::DTensor logits = tape.reshape(tape.matmul(s, P(h.wa)), {nodes, nodes});
        ad::DTensor alpha = tape.row_softmax(logits);
        head_outs.push_back(tape.add(tape.matmul(alpha, v), tape.attn_gather(alpha, s)));
    }
    ad::DTensor cat = tape.concat_cols(head_outs);
    return tape.rowvec_add(tape.matmul(cat, P(lay.wo)), P(lay.bo));
}

ad::DTensor GTBranch::gt_layer(ad::Tape& tape, const Binding& bind, int layer,
                               ad::DTensor states, ad::DTensor rrwp, int nodes,
                               const std::vector<double>* dropout_mask) const {
    auto P = [&](int id) { return bind.leaves[static_cast<std::size_t>(id)]; };
    const auto& lay = layers_[static_cast<std::size_t>(layer)];
    ad::DTensor att = rrwp_mha(tape, bind, layer, states, rrwp, nodes);
    if (dropout_mask)
        att = tape.mul(att, tape.constant({nodes, cfg_.hidden}, dropout_mask->data()));
    ad::DTensor g1 = tape.layer_norm(tape.add(att, states), P(lay.ln1_g), P(lay.ln1_b));
    ad::DTensor ff = tape.rowvec_add(
        tape.matmul(tape.relu(tape.rowvec_add(tape.matmul(g1, P(lay.ffn_w1)), P(lay.ffn_b1))),
                    P(lay.ffn_w2)),
        P(lay.ffn_b2));
    return tape.add(tape.layer_norm(ff, P(lay.ln2_g), P(lay.ln2_b)), g1);
}

ad::DTensor GTBranch::combine_supernode(ad::Tape& tape, const Binding& bind,
                                        const std::vector<ad::DTensor>& sup_states) const {
    auto P = [&](int id) { return bind.leaves[static_cast<std::size_t>(id)]; };
    return tape.rowvec_add(tape.matmul(tape.concat_cols(sup_states), P(combine_w_)),
                           P(combine_b_));
}

ad::DTensor GTBranch::spectrum_enhance(ad::Tape& tape, const Binding& bind, ad::DTensor h_sup,
                                       const GraphCache& cache) const {
    auto P = [&](int id) { return bind.leaves[static_cast<std::size_t>(id)]; };
    ad::DTensor rayleigh = tape.constant({1, cache.d}, cache.rayleigh.data());
    ad::DTensor h_rq = tape.relu(tape.rowvec_add(tape.matmul(rayleigh, P(rq_w_)), P(rq_b_)));
    return tape.relu(
        tape.rowvec_add(tape.matmul(tape.concat_cols({h_sup, h_rq}), P(out_w_)), P(out_b_)));
}

ad::DTensor GTBranch::forward(ad::Tape& tape, const Binding& bind, const GraphCache& cache,
                              const std::vector<std::vector<double>>* dropout_masks) const {
    const int n1 = cache.n + 1;
    ad::DTensor h0 = init_embed(tape, bind, augmented_features(tape, bind, cache));
    ad::DTensor g = degree_scale(tape, bind, h0, cache);
    ad::DTensor rrwp = tape.constant({n1 * n1, cfg_.T}, cache.rrwp_flat.data());

    std::vector<ad::DTensor> sup_states;
    sup_states.reserve(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const std::vector<double>* mask = dropout_masks ? &(*dropout_masks)[l] : nullptr;
        g = gt_layer(tape, bind, static_cast<int>(l), g, rrwp, n1, mask);
        sup_states.push_back(tape.gather_rows(g, {cache.n}));
    }

    ad::DTensor h_sup = combine_supernode(tape, bind, sup_states);
    return spectrum_enhance(tape, bind, h_sup, cache);
}

}  // namespace gladformer::nn
