#pragma once

#include <cstdint>
#include <string>

namespace gladformer {

struct TrainConfig {
    // architecture
    int T = 4;        // random-walk length (RRWP slices)
    int L = 6;        // transformer layers
    int M = 3;        // Beta wavelet order
    int K = 4;        // low/high-pass layers
    int hidden = 128;
    int out_width = 32;
    int heads = 4;
    int ffn_mult = 2;  // FFN hidden = ffn_mult * hidden
    double psi = 0.5;
    double dropout = 0.0;

    // loss
    double kappa = 0.2;

    // optimization
    double lr = 1e-3;
    int batch = 128;
    int max_epochs = 200;
    int patience = 20;
    std::uint64_t seed = 1;
    int threads = 1;

    // data handling
    bool downsample = false;
    double downsample_fraction = 0.1;
    std::string split_mode = "kfold";  // "holdout" or "kfold"
    int folds = 5;
    double train_frac = 0.70;
    double val_frac = 0.15;

    void validate() const;
};

}  // namespace gladformer
