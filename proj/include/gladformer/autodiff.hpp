#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gladformer::ad {

struct Shape {
    int rows = 0;
    int cols = 0;

    int size() const { return rows * cols; }
    bool operator==(const Shape& o) const { return rows == o.rows && cols == o.cols; }
    std::string str() const { return std::to_string(rows) + "x" + std::to_string(cols); }
};

class Tape;

// Lightweight handle into a tape. Valid only as long as the tape lives and is
// not cleared.
class DTensor {
  public:
    DTensor() = default;

    Shape shape() const;
    const double* data() const;
    // value of a 1x1 tensor
    double value() const;
    // gradient after backward(), nullptr if none was propagated
    const double* grad() const;

    bool valid() const { return tape_ != nullptr; }
    int id() const { return id_; }

  private:
    friend class Tape;
    DTensor(Tape* t, int id) : tape_(t), id_(id) {}
    Tape* tape_ = nullptr;
    int id_ = -1;
};

// Reverse-mode tape over dense row-major double tensors. Nodes are recorded in
// creation order, which is a valid topological order; backward walks it once
// in reverse. Tapes are single-threaded units of work; concurrent tapes never
// share state.
class Tape {
  public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Leaves. Borrowing leaves keep a pointer into caller-owned storage, which
    // must outlive the tape; copying constants own their data.
    DTensor constant(Shape s, const double* values);
    DTensor constant_copy(Shape s, std::vector<double> values);
    DTensor leaf(Shape s, const double* values);  // participates in gradients

    DTensor matmul(DTensor a, DTensor b);
    DTensor add(DTensor a, DTensor b);
    DTensor mul(DTensor a, DTensor b);  // elementwise
    DTensor rowvec_add(DTensor a, DTensor v);
    DTensor rowvec_mul(DTensor a, DTensor v);
    DTensor concat_cols(const std::vector<DTensor>& parts);
    DTensor concat_rows(const std::vector<DTensor>& parts);
    DTensor gather_rows(DTensor a, std::vector<int> rows);
    DTensor row_softmax(DTensor a);
    DTensor relu(DTensor a);
    DTensor sigmoid(DTensor a);
    // log with optional argument floor; gradient uses the floored argument
    DTensor log(DTensor a, double min_arg = 0.0);
    DTensor mean_rows(DTensor a);
    DTensor mean_all(DTensor a);
    DTensor affine(DTensor a, double scale, double shift);  // scale*a + shift
    DTensor scale(DTensor a, double s) { return affine(a, s, 0.0); }
    DTensor layer_norm(DTensor a, DTensor gain, DTensor bias, double eps = 1e-5);
    // relu(q_i (*) k_j + p_{(i,j)}) over all ordered node pairs; p has n^2 rows
    DTensor pair_score(DTensor q, DTensor k, DTensor p);
    // out_i = sum_j alpha_{ij} * s_{(i,j)}
    DTensor attn_gather(DTensor alpha, DTensor s);
    DTensor reshape(DTensor a, Shape s);

    // Populates gradients of every node that the scalar root depends on.
    void backward(DTensor root);

    const double* value_of(int id) const;
    const double* grad_of(int id) const;
    Shape shape_of(int id) const;

    std::size_t size() const { return nodes_.size(); }
    void clear();

    // NaN/Inf guard at op boundaries; defaults to on in debug builds.
    static void set_check_finite(bool on);
    static bool check_finite();

  private:
    enum class Op : std::uint8_t {
        kLeaf,
        kConstant,
        kMatmul,
        kAdd,
        kMul,
        kRowvecAdd,
        kRowvecMul,
        kConcatCols,
        kConcatRows,
        kGatherRows,
        kRowSoftmax,
        kRelu,
        kSigmoid,
        kLog,
        kMeanRows,
        kMeanAll,
        kAffine,
        kLayerNorm,
        kPairScore,
        kAttnGather,
        kReshape,
    };

    struct Node {
        Shape shape;
        Op op = Op::kConstant;
        bool needs_grad = false;
        const double* val = nullptr;    // points into own_val or external storage
        std::vector<double> own_val;
        std::vector<double> grad;       // allocated lazily during backward
        int a = -1, b = -1, c = -1;     // parents
        std::vector<int> parents;       // for concat
        std::vector<int> indices;       // for gather
        double s0 = 0.0, s1 = 0.0;      // op scalars (affine, log floor, eps)
        std::vector<double> aux;        // saved forward state (layer norm)
    };

    int push(Node n);
    Node& at(int id) { return nodes_[static_cast<std::size_t>(id)]; }
    const Node& at(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    double* grad_buffer(int id);
    void backward_node(int id);
    void check_node_finite(const Node& n, const char* op) const;

    std::vector<Node> nodes_;
};

// Central-difference gradient oracle. Each entry pairs a mutable parameter
// block with the analytic gradient to verify. `eval` must be a deterministic
// pure function of the parameter values; this is checked by double evaluation.
struct FiniteDiffEntry {
    double* values = nullptr;
    const double* analytic = nullptr;
    int size = 0;
};

struct FiniteDiffResult {
    double max_rel_err = 0.0;
    int worst_entry = -1;
    int worst_coord = -1;
};

FiniteDiffResult finite_diff_check(const std::function<double()>& eval,
                                   const std::vector<FiniteDiffEntry>& entries, double h);

}  // namespace gladformer::ad
