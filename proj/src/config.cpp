#include "gladformer/config.hpp"

#include "gladformer/errors.hpp"

namespace gladformer {

void TrainConfig::validate() const {
    if (T < 1) throw ArgError("T must be >= 1");
    if (L < 1) throw ArgError("L must be >= 1");
    if (M < 1) throw ArgError("M must be >= 1");
    if (K < 1) throw ArgError("K must be >= 1");
    if (hidden < 1 || out_width < 1) throw ArgError("widths must be positive");
    if (heads < 1 || hidden % heads != 0)
        throw ArgError("heads must be positive and divide hidden width");
    if (ffn_mult < 1) throw ArgError("ffn_mult must be >= 1");
    if (!(psi >= 0.0 && psi <= 1.0)) throw ArgError("psi must be in [0, 1]");
    if (!(kappa >= 0.0 && kappa < 1.0)) throw ArgError("kappa must be in [0, 1)");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ArgError("dropout must be in [0, 1)");
    if (!(lr > 0.0)) throw ArgError("lr must be positive");
    if (batch < 1) throw ArgError("batch must be >= 1");
    if (max_epochs < 0) throw ArgError("max_epochs must be >= 0");
    if (patience < 1) throw ArgError("patience must be >= 1");
    if (threads < 1) throw ArgError("threads must be >= 1");
    if (split_mode != "holdout" && split_mode != "kfold")
        throw ArgError("split_mode must be 'holdout' or 'kfold'");
    if (split_mode == "kfold" && folds < 2) throw ArgError("folds must be >= 2");
    if (!(train_frac > 0.0 && val_frac >= 0.0 && train_frac + val_frac < 1.0))
        throw ArgError("split fractions must satisfy 0 < train, 0 <= val, train+val < 1");
    if (downsample && !(downsample_fraction > 0.0 && downsample_fraction <= 1.0))
        throw ArgError("downsample_fraction must be in (0, 1]");
}

}  // namespace gladformer
