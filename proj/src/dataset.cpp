#include "gladformer/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "gladformer/errors.hpp"
#include "gladformer/rng.hpp"

namespace fs = std::filesystem;

namespace gladformer::data {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(trim(tok));
    return out;
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw IngestError("cannot open " + p.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

long parse_long(const std::string& tok, const fs::path& file, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        long v = std::stol(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw FormatError("bad integer '" + tok + "' in " + file.string() + " line " +
                          std::to_string(lineno));
    }
}

double parse_real(const std::string& tok, const fs::path& file, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw FormatError("bad number '" + tok + "' in " + file.string() + " line " +
                          std::to_string(lineno));
    }
}

}  // namespace

GraphDataset load_tudataset(const std::string& dir, const std::string& name) {
    const fs::path base = fs::path(dir) / name;
    const fs::path a_file = base / (name + "_A.txt");
    const fs::path ind_file = base / (name + "_graph_indicator.txt");
    const fs::path lab_file = base / (name + "_graph_labels.txt");
    const fs::path nlab_file = base / (name + "_node_labels.txt");
    const fs::path nattr_file = base / (name + "_node_attributes.txt");

    for (const fs::path& p : {a_file, ind_file, lab_file})
        if (!fs::exists(p)) throw IngestError("missing mandatory file " + p.string());

    // graph indicator: 1-indexed graph id per global node (node ids are line numbers)
    const auto ind_lines = read_lines(ind_file);
    const long n_nodes = static_cast<long>(ind_lines.size());
    std::vector<int> node_graph(n_nodes);
    int n_graphs = 0;
    for (long i = 0; i < n_nodes; ++i) {
        long gid = parse_long(ind_lines[static_cast<std::size_t>(i)], ind_file,
                              static_cast<std::size_t>(i) + 1);
        if (gid < 1) throw FormatError("graph id < 1 in " + ind_file.string() + " line " +
                                       std::to_string(i + 1));
        node_graph[static_cast<std::size_t>(i)] = static_cast<int>(gid - 1);
        n_graphs = std::max(n_graphs, static_cast<int>(gid));
    }

    // local node index within each graph (nodes of one graph are contiguous in
    // well-formed files, but contiguity is not assumed)
    std::vector<int> graph_size(static_cast<std::size_t>(n_graphs), 0);
    std::vector<int> local_id(static_cast<std::size_t>(n_nodes));
    for (long i = 0; i < n_nodes; ++i) {
        int g = node_graph[static_cast<std::size_t>(i)];
        local_id[static_cast<std::size_t>(i)] = graph_size[static_cast<std::size_t>(g)]++;
    }

    // graph labels
    const auto lab_lines = read_lines(lab_file);
    if (static_cast<int>(lab_lines.size()) != n_graphs)
        throw FormatError(lab_file.string() + " has " + std::to_string(lab_lines.size()) +
                          " labels for " + std::to_string(n_graphs) + " graphs");
    std::vector<long> raw_labels(static_cast<std::size_t>(n_graphs));
    for (std::size_t i = 0; i < lab_lines.size(); ++i)
        raw_labels[i] = parse_long(lab_lines[i], lab_file, i + 1);

    // node features, attribute-priority: real attributes when present,
    // otherwise one-hot node labels, otherwise a constant-1 column
    int d = 0;
    std::vector<std::vector<double>> feats(static_cast<std::size_t>(n_nodes));
    if (fs::exists(nattr_file)) {
        const auto attr_lines = read_lines(nattr_file);
        if (static_cast<long>(attr_lines.size()) != n_nodes)
            throw FormatError(nattr_file.string() + " has " + std::to_string(attr_lines.size()) +
                              " rows for " + std::to_string(n_nodes) + " nodes");
        for (std::size_t i = 0; i < attr_lines.size(); ++i) {
            auto toks = split_csv(attr_lines[i]);
            if (d == 0) d = static_cast<int>(toks.size());
            if (static_cast<int>(toks.size()) != d)
                throw FormatError("inconsistent attribute arity in " + nattr_file.string() +
                                  " line " + std::to_string(i + 1) + ": got " +
                                  std::to_string(toks.size()) + ", expected " + std::to_string(d));
            feats[i].reserve(toks.size());
            for (const auto& t : toks) feats[i].push_back(parse_real(t, nattr_file, i + 1));
        }
    } else if (fs::exists(nlab_file)) {
        const auto nlab_lines = read_lines(nlab_file);
        if (static_cast<long>(nlab_lines.size()) != n_nodes)
            throw FormatError(nlab_file.string() + " has " + std::to_string(nlab_lines.size()) +
                              " rows for " + std::to_string(n_nodes) + " nodes");
        std::vector<long> nl(static_cast<std::size_t>(n_nodes));
        std::set<long> values;
        for (std::size_t i = 0; i < nlab_lines.size(); ++i) {
            nl[i] = parse_long(nlab_lines[i], nlab_file, i + 1);
            values.insert(nl[i]);
        }
        std::map<long, int> slot;
        for (long v : values) slot[v] = static_cast<int>(slot.size());
        d = static_cast<int>(values.size());
        for (std::size_t i = 0; i < nl.size(); ++i) {
            feats[i].assign(static_cast<std::size_t>(d), 0.0);
            feats[i][static_cast<std::size_t>(slot[nl[i]])] = 1.0;
        }
    } else {
        d = 1;
        for (auto& f : feats) f.assign(1, 1.0);
    }

    // edges: comma-separated 1-indexed global pairs; both single and double
    // listing conventions occur in the wild, so deduplicate
    std::vector<std::set<std::pair<int, int>>> edge_sets(static_cast<std::size_t>(n_graphs));
    const auto a_lines = read_lines(a_file);
    for (std::size_t i = 0; i < a_lines.size(); ++i) {
        auto toks = split_csv(a_lines[i]);
        if (toks.size() != 2)
            throw FormatError("expected 2 columns in " + a_file.string() + " line " +
                              std::to_string(i + 1));
        long u = parse_long(toks[0], a_file, i + 1);
        long v = parse_long(toks[1], a_file, i + 1);
        if (u < 1 || u > n_nodes || v < 1 || v > n_nodes)
            throw FormatError("edge references node absent from indicator in " + a_file.string() +
                              " line " + std::to_string(i + 1));
        if (u == v) continue;  // self-loops are dropped
        int gu = node_graph[static_cast<std::size_t>(u - 1)];
        int gv = node_graph[static_cast<std::size_t>(v - 1)];
        if (gu != gv)
            throw FormatError("edge crosses graphs in " + a_file.string() + " line " +
                              std::to_string(i + 1));
        int lu = local_id[static_cast<std::size_t>(u - 1)];
        int lv = local_id[static_cast<std::size_t>(v - 1)];
        edge_sets[static_cast<std::size_t>(gu)].insert({std::min(lu, lv), std::max(lu, lv)});
    }

    GraphDataset ds;
    ds.name = name;
    ds.d = d;
    ds.graphs.resize(static_cast<std::size_t>(n_graphs));
    for (int g = 0; g < n_graphs; ++g) {
        auto& gr = ds.graphs[static_cast<std::size_t>(g)];
        gr.id = g;
        gr.n = graph_size[static_cast<std::size_t>(g)];
        gr.edges.assign(edge_sets[static_cast<std::size_t>(g)].begin(),
                        edge_sets[static_cast<std::size_t>(g)].end());
        gr.x.resize(gr.n, d);
    }
    for (long i = 0; i < n_nodes; ++i) {
        int g = node_graph[static_cast<std::size_t>(i)];
        int li = local_id[static_cast<std::size_t>(i)];
        auto& gr = ds.graphs[static_cast<std::size_t>(g)];
        for (int j = 0; j < d; ++j) gr.x(li, j) = feats[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }

    // remap labels so the minority class is the anomaly (ties -> smallest raw
    // label); this reproduces every anomaly count of the reference statistics
    std::map<long, int> counts;
    for (long rl : raw_labels) counts[rl]++;
    long anom_raw = raw_labels.empty() ? 0 : counts.begin()->first;
    int best = counts.empty() ? 0 : counts.begin()->second;
    for (const auto& [rl, c] : counts) {
        if (c < best) {
            best = c;
            anom_raw = rl;
        }
    }
    for (int g = 0; g < n_graphs; ++g)
        ds.graphs[static_cast<std::size_t>(g)].y = (raw_labels[static_cast<std::size_t>(g)] == anom_raw) ? 1 : 0;
    ds.label_note = "raw label " + std::to_string(anom_raw) + " -> anomalous (minority " +
                    std::to_string(best) + "/" + std::to_string(n_graphs) + ")";
    return ds;
}

void save_tudataset(const GraphDataset& ds, const std::string& dir) {
    const fs::path base = fs::path(dir) / ds.name;
    fs::create_directories(base);
    std::ofstream a(base / (ds.name + "_A.txt"));
    std::ofstream ind(base / (ds.name + "_graph_indicator.txt"));
    std::ofstream lab(base / (ds.name + "_graph_labels.txt"));
    std::ofstream attr(base / (ds.name + "_node_attributes.txt"));
    if (!a || !ind || !lab || !attr) throw IngestError("cannot write dataset under " + base.string());

    long offset = 1;  // global ids are 1-indexed
    int gid = 1;
    for (const auto& g : ds.graphs) {
        for (auto [u, v] : g.edges) {
            a << offset + u << ", " << offset + v << "\n";
            a << offset + v << ", " << offset + u << "\n";
        }
        for (int i = 0; i < g.n; ++i) {
            ind << gid << "\n";
            for (int j = 0; j < g.x.cols(); ++j) {
                if (j) attr << ", ";
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.17g", g.x(i, j));
                attr << buf;
            }
            attr << "\n";
        }
        lab << g.y << "\n";
        offset += g.n;
        ++gid;
    }
}

GraphDataset downsample_anomalies(const GraphDataset& ds, double keep_fraction,
                                  std::uint64_t seed) {
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
        throw ArgError("keep_fraction must be in (0, 1], got " + std::to_string(keep_fraction));
    std::vector<int> anom;
    for (int i = 0; i < ds.size(); ++i)
        if (ds.graphs[static_cast<std::size_t>(i)].y == 1) anom.push_back(i);
    const int n_keep = static_cast<int>(std::ceil(keep_fraction * static_cast<double>(anom.size())));
    if (static_cast<int>(anom.size()) < n_keep || anom.empty())
        throw ArgError("not enough anomalous graphs to downsample");

    Rng rng(seed);
    rng.shuffle(anom);
    std::set<int> kept(anom.begin(), anom.begin() + n_keep);

    GraphDataset out;
    out.name = ds.name;
    out.d = ds.d;
    out.label_note = ds.label_note;
    for (int i = 0; i < ds.size(); ++i) {
        const auto& g = ds.graphs[static_cast<std::size_t>(i)];
        if (g.y == 0 || kept.count(i)) out.graphs.push_back(g);
    }
    return out;
}

namespace {

// indices of each class, in dataset order
std::array<std::vector<int>, 2> by_class(const GraphDataset& ds) {
    std::array<std::vector<int>, 2> cls;
    for (int i = 0; i < ds.size(); ++i)
        cls[static_cast<std::size_t>(ds.graphs[static_cast<std::size_t>(i)].y)].push_back(i);
    return cls;
}

}  // namespace

SplitSpec make_holdout_split(const GraphDataset& ds, double train_frac, double val_frac,
                             std::uint64_t seed) {
    if (ds.size() == 0) throw SplitError("empty dataset");
    if (!(train_frac > 0.0 && val_frac >= 0.0 && train_frac + val_frac < 1.0))
        throw ArgError("holdout fractions must satisfy 0 < train, 0 <= val, train+val < 1");

    Rng rng(seed);
    SplitSpec spec;
    spec.seed = seed;
    auto cls = by_class(ds);
    for (auto& members : cls) {
        if (members.empty()) continue;
        rng.shuffle(members);
        const int n = static_cast<int>(members.size());
        int n_train = static_cast<int>(std::lround(train_frac * n));
        int n_val = static_cast<int>(std::lround(val_frac * n));
        n_train = std::min(n_train, n);
        n_val = std::min(n_val, n - n_train);
        for (int i = 0; i < n; ++i) {
            if (i < n_train)
                spec.train.push_back(members[static_cast<std::size_t>(i)]);
            else if (i < n_train + n_val)
                spec.val.push_back(members[static_cast<std::size_t>(i)]);
            else
                spec.test.push_back(members[static_cast<std::size_t>(i)]);
        }
    }
    std::sort(spec.train.begin(), spec.train.end());
    std::sort(spec.val.begin(), spec.val.end());
    std::sort(spec.test.begin(), spec.test.end());
    return spec;
}

SplitSpec make_kfold_split(const GraphDataset& ds, int k, std::uint64_t seed) {
    if (ds.size() == 0) throw SplitError("empty dataset");
    if (k < 2) throw ArgError("kfold requires k >= 2");

    Rng rng(seed);
    SplitSpec spec;
    spec.seed = seed;
    spec.folds.resize(static_cast<std::size_t>(k));
    auto cls = by_class(ds);
    for (auto& members : cls) {
        if (members.empty()) continue;
        if (static_cast<int>(members.size()) < k)
            throw SplitError("a class has fewer members (" + std::to_string(members.size()) +
                             ") than k=" + std::to_string(k));
        rng.shuffle(members);
        for (std::size_t i = 0; i < members.size(); ++i)
            spec.folds[i % static_cast<std::size_t>(k)].push_back(members[i]);
    }
    for (auto& f : spec.folds) std::sort(f.begin(), f.end());
    return spec;
}

GraphDataset generate_synthetic(int n_graphs, double anomaly_rate, int nodes_min,
                                int nodes_max, std::uint64_t seed) {
    if (!(anomaly_rate > 0.0 && anomaly_rate < 1.0))
        throw ArgError("anomaly_rate must be in (0, 1)");
    if (n_graphs < 2 || nodes_min < 2 || nodes_max < nodes_min)
        throw ArgError("degenerate synthetic parameters");

    const int d = 4;
    const int n_anom = std::max(1, static_cast<int>(std::lround(anomaly_rate * n_graphs)));

    Rng rng(seed);
    GraphDataset ds;
    ds.name = "SYNTH";
    ds.d = d;
    ds.label_note = "synthetic: label 1 planted anomalous";
    ds.graphs.resize(static_cast<std::size_t>(n_graphs));

    // anomaly ids: seeded uniform choice without replacement
    std::vector<int> ids(static_cast<std::size_t>(n_graphs));
    std::iota(ids.begin(), ids.end(), 0);
    rng.shuffle(ids);
    std::set<int> anom_ids(ids.begin(), ids.begin() + n_anom);

    for (int gi = 0; gi < n_graphs; ++gi) {
        Graph& g = ds.graphs[static_cast<std::size_t>(gi)];
        g.id = gi;
        g.y = anom_ids.count(gi) ? 1 : 0;
        g.n = nodes_min + rng.uniform_int(nodes_max - nodes_min + 1);

        // random spanning tree keeps the graph connected, then ER extras
        std::set<std::pair<int, int>> edges;
        for (int v = 1; v < g.n; ++v) {
            int u = rng.uniform_int(v);
            edges.insert({u, v});
        }
        const double p_extra = 0.15;
        for (int u = 0; u < g.n; ++u)
            for (int v = u + 1; v < g.n; ++v)
                if (rng.uniform() < p_extra) edges.insert({u, v});
        g.edges.assign(edges.begin(), edges.end());

        // smooth base: one shared vector per graph plus small noise
        Eigen::VectorXd base(d);
        for (int j = 0; j < d; ++j) base(j) = rng.uniform(-1.0, 1.0);
        g.x.resize(g.n, d);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < d; ++j) g.x(i, j) = base(j) + 0.1 * rng.uniform(-1.0, 1.0);

        if (g.y == 1) {
            // high-frequency component: sign alternates across a random bipartition
            Eigen::VectorXd dir(d);
            double norm2 = 0.0;
            for (int j = 0; j < d; ++j) {
                dir(j) = rng.uniform(-1.0, 1.0);
                norm2 += dir(j) * dir(j);
            }
            dir *= 1.5 / std::sqrt(std::max(norm2, 1e-12));
            for (int i = 0; i < g.n; ++i) {
                double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                for (int j = 0; j < d; ++j) g.x(i, j) += sign * dir(j);
            }
        }
    }
    return ds;
}

DatasetStats dataset_stats(const GraphDataset& ds) {
    DatasetStats s;
    s.n_graphs = ds.size();
    s.n_anom = ds.anomaly_count();
    s.d = ds.d;
    if (s.n_graphs == 0) return s;
    double nodes = 0.0, edges = 0.0;
    for (const auto& g : ds.graphs) {
        nodes += g.n;
        edges += g.num_edges();
    }
    s.avg_nodes = nodes / s.n_graphs;
    s.avg_edges = edges / s.n_graphs;
    s.ratio_pct = 100.0 * static_cast<double>(s.n_anom) / static_cast<double>(s.n_graphs);
    return s;
}

}  // namespace gladformer::data
