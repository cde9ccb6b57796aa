#pragma once

#include <cstdint>
#include <string>

#include "gladformer/graph.hpp"

namespace gladformer::data {

// Reads a TUDataset-format directory: {name}_A.txt, {name}_graph_indicator.txt,
// {name}_graph_labels.txt, plus optional node labels / node attributes.
// Node features follow the attribute-priority convention: real-valued node
// attributes when present, otherwise one-hot encoded node labels, otherwise a
// single constant-1 column. Graph labels are remapped so the minority class is
// 1; the applied mapping is recorded in GraphDataset::label_note.
GraphDataset load_tudataset(const std::string& dir, const std::string& name);

// Writes a dataset back out in TUDataset format (each undirected edge emitted
// in both directions, 1-indexed ids, features as node attributes).
void save_tudataset(const GraphDataset& ds, const std::string& dir);

// Keeps ceil(keep_fraction * N_anom) anomalous graphs (seeded uniform sample
// without replacement) and every normal graph. Graph contents are untouched.
GraphDataset downsample_anomalies(const GraphDataset& ds, double keep_fraction,
                                  std::uint64_t seed);

// Stratified seeded holdout split; fractions must leave room for a test part.
SplitSpec make_holdout_split(const GraphDataset& ds, double train_frac,
                             double val_frac, std::uint64_t seed);

// Stratified seeded k-fold split; every class must have at least k members.
SplitSpec make_kfold_split(const GraphDataset& ds, int k, std::uint64_t seed);

// Seeded random connected graphs with planted spectral anomalies: every graph
// carries one smooth feature vector plus noise; anomalous graphs additionally
// carry a sign-alternating component across a random bipartition, which gives
// them a strictly larger expected Rayleigh quotient.
GraphDataset generate_synthetic(int n_graphs, double anomaly_rate, int nodes_min,
                                int nodes_max, std::uint64_t seed);

DatasetStats dataset_stats(const GraphDataset& ds);

}  // namespace gladformer::data
