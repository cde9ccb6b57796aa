#include "gladformer/localspec.hpp"

#include <string>

namespace gladformer::nn {

LSBranch::LSBranch(ParamStore& store, const TrainConfig& cfg, int feat_dim)
    : cfg_(cfg), feat_dim_(feat_dim) {
    band_w_ = store.add("ls.band.w", (cfg.M + 1) * feat_dim, cfg.hidden);
    band_b_ = store.add("ls.band.b", 1, cfg.hidden, InitKind::kZero);
    for (int l = 0; l < cfg.K; ++l) {
        const int in_width = (l == 0) ? 2 * feat_dim : 2 * cfg.hidden;
        const std::string pfx = "ls.layer" + std::to_string(l) + ".";
        layer_wb_.emplace_back(store.add(pfx + "w", in_width, cfg.hidden),
                               store.add(pfx + "b", 1, cfg.hidden, InitKind::kZero));
    }
    combine_w_ = store.add("ls.combine.w", cfg.K * cfg.hidden, cfg.hidden);
    combine_b_ = store.add("ls.combine.b", 1, cfg.hidden, InitKind::kZero);
    readout_w_ = store.add("ls.readout.w", 2 * cfg.hidden, cfg.out_width);
    readout_b_ = store.add("ls.readout.b", 1, cfg.out_width, InitKind::kZero);
}

ad::DTensor LSBranch::band_pass_embed(ad::Tape& tape, const Binding& bind,
                                      const GraphCache& cache) const {
    auto P = [&](int id) { return bind.leaves[static_cast<std::size_t>(id)]; };
    ad::DTensor bank = tape.constant({cache.n, (cfg_.M + 1) * cache.d}, cache.bank.data());
    return tape.rowvec_add(tape.matmul(bank, P(band_w_)), P(band_b_));
}

ad::DTensor LSBranch::lowhigh_layer(ad::Tape& tape, const Binding& bind, int layer,
                                    ad::DTensor h_prev, ad::DTensor f_low,
                                    ad::DTensor f_high) const {
    auto P = [&](int id) { return bind.leaves[static_cast<std::size_t>(id)]; };
    const auto& [w, b] = layer_wb_[static_cast<std::size_t>(layer)];
    ad::DTensor u =
        tape.concat_cols({tape.matmul(f_low, h_prev), tape.matmul(f_high, h_prev)});
    return tape.relu(tape.rowvec_add(tape.matmul(u, P(w)), P(b)));
}

ad::DTensor LSBranch::combine_layers(ad::Tape& tape, const Binding& bind,
                                     const std::vector<ad::DTensor>& states) const {
    auto P = [&](int id) { return bind.leaves[static_cast<std::size_t>(id)]; };
    return tape.rowvec_add(tape.matmul(tape.concat_cols(states), P(combine_w_)),
                           P(combine_b_));
}

ad::DTensor LSBranch::local_readout(ad::Tape& tape, const Binding& bind, ad::DTensor h_b,
                                    ad::DTensor h_p) const {
    auto P = [&](int id) { return bind.leaves[static_cast<std::size_t>(id)]; };
    ad::DTensor pooled = tape.mean_rows(tape.concat_cols({h_b, h_p}));
    return tape.rowvec_add(tape.matmul(pooled, P(readout_w_)), P(readout_b_));
}

ad::DTensor LSBranch::forward(ad::Tape& tape, const Binding& bind,
                              const GraphCache& cache) const {
    ad::DTensor h_b = band_pass_embed(tape, bind, cache);

    ad::DTensor f_low = tape.constant({cache.n, cache.n}, cache.f_low.data());
    ad::DTensor f_high = tape.constant({cache.n, cache.n}, cache.f_high.data());
    ad::DTensor h = tape.constant({cache.n, cache.d}, cache.x.data());
    std::vector<ad::DTensor> states;
    states.reserve(layer_wb_.size());
    for (int l = 0; l < cfg_.K; ++l) {
        h = lowhigh_layer(tape, bind, l, h, f_low, f_high);
        states.push_back(h);
    }
    ad::DTensor h_p = combine_layers(tape, bind, states);
    return local_readout(tape, bind, h_b, h_p);
}

FusionHead::FusionHead(ParamStore& store, const TrainConfig& cfg) {
    fuse_w_ = store.add("fuse.w", 2 * cfg.out_width, cfg.out_width);
    fuse_b_ = store.add("fuse.b", 1, cfg.out_width, InitKind::kZero);
    head_w1_ = store.add("head.w1", cfg.out_width, cfg.out_width);
    head_b1_ = store.add("head.b1", 1, cfg.out_width, InitKind::kZero);
    head_w2_ = store.add("head.w2", cfg.out_width, 1);
    head_b2_ = store.add("head.b2", 1, 1, InitKind::kZero);
}

ad::DTensor FusionHead::fuse(ad::Tape& tape, const Binding& bind, ad::DTensor h_gt,
                             ad::DTensor h_loc) const {
    auto P = [&](int id) { return bind.leaves[static_cast<std::size_t>(id)]; };
    return tape.relu(
        tape.rowvec_add(tape.matmul(tape.concat_cols({h_gt, h_loc}), P(fuse_w_)), P(fuse_b_)));
}

ad::DTensor FusionHead::classify(ad::Tape& tape, const Binding& bind, ad::DTensor h_g) const {
    auto P = [&](int id) { return bind.leaves[static_cast<std::size_t>(id)]; };
    ad::DTensor hidden =
        tape.relu(tape.rowvec_add(tape.matmul(h_g, P(head_w1_)), P(head_b1_)));
    return tape.sigmoid(tape.rowvec_add(tape.matmul(hidden, P(head_w2_)), P(head_b2_)));
}

}  // namespace gladformer::nn
