#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gladformer::data {

// One attributed undirected graph with a binary anomaly label.
// Edges are stored once per undirected pair with i < j, deduplicated and
// self-loop free; endpoints are 0-indexed local node ids.
struct Graph {
    int id = 0;
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    Eigen::MatrixXd x;  // n x d node features
    int y = 0;          // 1 = anomalous

    int num_edges() const { return static_cast<int>(edges.size()); }
};

struct GraphDataset {
    std::string name;
    std::vector<Graph> graphs;
    int d = 0;
    std::string label_note;  // provenance of the raw-label -> {0,1} remapping

    int size() const { return static_cast<int>(graphs.size()); }
    int anomaly_count() const {
        int c = 0;
        for (const auto& g : graphs) c += g.y;
        return c;
    }
};

// Either a holdout split (train/val/test) or k disjoint folds, never both.
struct SplitSpec {
    std::uint64_t seed = 0;
    std::vector<int> train, val, test;
    std::vector<std::vector<int>> folds;

    bool is_kfold() const { return !folds.empty(); }
};

struct DatasetStats {
    int n_graphs = 0;
    int n_anom = 0;
    double ratio_pct = 0.0;
    double avg_nodes = 0.0;
    double avg_edges = 0.0;
    int d = 0;
};

}  // namespace gladformer::data
