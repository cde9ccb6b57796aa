#pragma once

#include <vector>

#include "gladformer/autodiff.hpp"
#include "gladformer/graph.hpp"

namespace gladformer::loss {

// Variation-optimized cross-entropy:
//   -weight * y * log(kappa + (1-kappa)p) / (1-kappa)
//   -(1-y) * log(kappa + (1-kappa)(1-p)) / (1-kappa)
// kappa = 0 recovers weighted cross-entropy; kappa > 0 bounds the gradient.
double voce_loss(double p, int y, double kappa, double weight);

// Closed-form d loss / d p:  -weight/(kappa+(1-kappa)p) for y=1,
// +1/(kappa+(1-kappa)(1-p)) for y=0.
double voce_gradient(double p, int y, double kappa, double weight);

// Same loss composed from tape operations, for the training path.
ad::DTensor voce_loss_node(ad::Tape& tape, ad::DTensor p, int y, double kappa, double weight);

// Class-imbalance weight: ln(1 + N_normal / N_anomalous) over the given
// training indices.
double class_ratio_weight(const data::GraphDataset& ds, const std::vector<int>& train_indices);

}  // namespace gladformer::loss
