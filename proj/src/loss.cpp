#include "gladformer/loss.hpp"

#include <cmath>

#include "gladformer/errors.hpp"

namespace gladformer::loss {

namespace {

constexpr double kLogFloor = 1e-12;

void check_kappa(double kappa) {
    if (!(kappa >= 0.0 && kappa < 1.0))
        throw ArgError("kappa must be in [0, 1), got " + std::to_string(kappa));
}

}  // namespace

double voce_loss(double p, int y, double kappa, double weight) {
    check_kappa(kappa);
    if (y == 1)
        return -weight * std::log(std::max(kappa + (1.0 - kappa) * p, kLogFloor)) / (1.0 - kappa);
    return -std::log(std::max(kappa + (1.0 - kappa) * (1.0 - p), kLogFloor)) / (1.0 - kappa);
}

double voce_gradient(double p, int y, double kappa, double weight) {
    check_kappa(kappa);
    if (y == 1) return -weight / std::max(kappa + (1.0 - kappa) * p, kLogFloor);
    return 1.0 / std::max(kappa + (1.0 - kappa) * (1.0 - p), kLogFloor);
}

ad::DTensor voce_loss_node(ad::Tape& tape, ad::DTensor p, int y, double kappa, double weight) {
    check_kappa(kappa);
    if (y == 1) {
        // kappa + (1-kappa) p
        ad::DTensor arg = tape.affine(p, 1.0 - kappa, kappa);
        return tape.scale(tape.log(arg, kLogFloor), -weight / (1.0 - kappa));
    }
    // kappa + (1-kappa)(1 - p) = (kappa + (1-kappa)) - (1-kappa) p = 1 - (1-kappa) p
    ad::DTensor arg = tape.affine(p, -(1.0 - kappa), 1.0);
    return tape.scale(tape.log(arg, kLogFloor), -1.0 / (1.0 - kappa));
}

double class_ratio_weight(const data::GraphDataset& ds, const std::vector<int>& train_indices) {
    long n_anom = 0, n_norm = 0;
    for (int i : train_indices) {
        if (ds.graphs[static_cast<std::size_t>(i)].y == 1)
            ++n_anom;
        else
            ++n_norm;
    }
    if (n_anom == 0 || n_norm == 0)
        throw ContractError("class_ratio_weight: both classes must be present");
    return std::log(1.0 + static_cast<double>(n_norm) / static_cast<double>(n_anom));
}

}  // namespace gladformer::loss
