#include "gladformer/autodiff.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "gladformer/errors.hpp"

namespace gladformer::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

#ifdef NDEBUG
bool g_check_finite = false;
#else
bool g_check_finite = true;
#endif

}  // namespace

void Tape::set_check_finite(bool on) { g_check_finite = on; }
bool Tape::check_finite() { return g_check_finite; }

Shape DTensor::shape() const { return tape_->shape_of(id_); }
const double* DTensor::data() const { return tape_->value_of(id_); }
const double* DTensor::grad() const { return tape_->grad_of(id_); }

double DTensor::value() const {
    if (!(shape() == Shape{1, 1}))
        throw ContractError("DTensor::value called on non-scalar " + shape().str());
    return data()[0];
}

const double* Tape::value_of(int id) const { return at(id).val; }
Shape Tape::shape_of(int id) const { return at(id).shape; }

const double* Tape::grad_of(int id) const {
    const Node& n = at(id);
    return n.grad.empty() ? nullptr : n.grad.data();
}

int Tape::push(Node n) {
    if (g_check_finite) {
        static const char* names[] = {
            "leaf",       "constant",   "matmul",     "add",        "mul",
            "rowvec_add", "rowvec_mul", "concat_cols", "concat_rows", "gather_rows",
            "row_softmax", "relu",      "sigmoid",    "log",        "mean_rows",
            "mean_all",   "affine",     "layer_norm", "pair_score", "attn_gather",
            "reshape"};
        check_node_finite(n, names[static_cast<int>(n.op)]);
    }
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::check_node_finite(const Node& n, const char* op) const {
    const int sz = n.shape.size();
    for (int i = 0; i < sz; ++i)
        if (!std::isfinite(n.val[i]))
            throw ContractError(std::string("non-finite value produced by op ") + op);
}

double* Tape::grad_buffer(int id) {
    Node& n = at(id);
    if (!n.needs_grad) return nullptr;
    if (n.grad.empty()) n.grad.assign(static_cast<std::size_t>(n.shape.size()), 0.0);
    return n.grad.data();
}

void Tape::clear() { nodes_.clear(); }

DTensor Tape::constant(Shape s, const double* values) {
    Node n;
    n.shape = s;
    n.op = Op::kConstant;
    n.val = values;
    return {this, push(std::move(n))};
}

DTensor Tape::constant_copy(Shape s, std::vector<double> values) {
    if (static_cast<int>(values.size()) != s.size())
        throw ShapeError("constant_copy: " + std::to_string(values.size()) + " values for shape " +
                         s.str());
    Node n;
    n.shape = s;
    n.op = Op::kConstant;
    n.own_val = std::move(values);
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::leaf(Shape s, const double* values) {
    Node n;
    n.shape = s;
    n.op = Op::kLeaf;
    n.needs_grad = true;
    n.val = values;
    return {this, push(std::move(n))};
}

namespace {

void require(bool ok, const char* op, Shape a, Shape b) {
    if (!ok)
        throw ShapeError(std::string(op) + ": incompatible shapes " + a.str() + " and " + b.str());
}

}  // namespace

DTensor Tape::matmul(DTensor a, DTensor b) {
    const Shape sa = a.shape(), sb = b.shape();
    require(sa.cols == sb.rows, "matmul", sa, sb);
    Node n;
    n.shape = {sa.rows, sb.cols};
    n.op = Op::kMatmul;
    n.a = a.id();
    n.b = b.id();
    n.needs_grad = at(a.id()).needs_grad || at(b.id()).needs_grad;
    n.own_val.resize(static_cast<std::size_t>(n.shape.size()));
    MutMap(n.own_val.data(), n.shape.rows, n.shape.cols).noalias() =
        ConstMap(a.data(), sa.rows, sa.cols) * ConstMap(b.data(), sb.rows, sb.cols);
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::add(DTensor a, DTensor b) {
    const Shape sa = a.shape(), sb = b.shape();
    require(sa == sb, "add", sa, sb);
    Node n;
    n.shape = sa;
    n.op = Op::kAdd;
    n.a = a.id();
    n.b = b.id();
    n.needs_grad = at(a.id()).needs_grad || at(b.id()).needs_grad;
    n.own_val.resize(static_cast<std::size_t>(sa.size()));
    const double* pa = a.data();
    const double* pb = b.data();
    for (int i = 0; i < sa.size(); ++i) n.own_val[static_cast<std::size_t>(i)] = pa[i] + pb[i];
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::mul(DTensor a, DTensor b) {
    const Shape sa = a.shape(), sb = b.shape();
    require(sa == sb, "mul", sa, sb);
    Node n;
    n.shape = sa;
    n.op = Op::kMul;
    n.a = a.id();
    n.b = b.id();
    n.needs_grad = at(a.id()).needs_grad || at(b.id()).needs_grad;
    n.own_val.resize(static_cast<std::size_t>(sa.size()));
    const double* pa = a.data();
    const double* pb = b.data();
    for (int i = 0; i < sa.size(); ++i) n.own_val[static_cast<std::size_t>(i)] = pa[i] * pb[i];
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::rowvec_add(DTensor a, DTensor v) {
    const Shape sa = a.shape(), sv = v.shape();
    require(sv.rows == 1 && sv.cols == sa.cols, "rowvec_add", sa, sv);
    Node n;
    n.shape = sa;
    n.op = Op::kRowvecAdd;
    n.a = a.id();
    n.b = v.id();
    n.needs_grad = at(a.id()).needs_grad || at(v.id()).needs_grad;
    n.own_val.resize(static_cast<std::size_t>(sa.size()));
    const double* pa = a.data();
    const double* pv = v.data();
    for (int i = 0; i < sa.rows; ++i)
        for (int j = 0; j < sa.cols; ++j)
            n.own_val[static_cast<std::size_t>(i * sa.cols + j)] = pa[i * sa.cols + j] + pv[j];
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::rowvec_mul(DTensor a, DTensor v) {
    const Shape sa = a.shape(), sv = v.shape();
    require(sv.rows == 1 && sv.cols == sa.cols, "rowvec_mul", sa, sv);
    Node n;
    n.shape = sa;
    n.op = Op::kRowvecMul;
    n.a = a.id();
    n.b = v.id();
    n.needs_grad = at(a.id()).needs_grad || at(v.id()).needs_grad;
    n.own_val.resize(static_cast<std::size_t>(sa.size()));
    const double* pa = a.data();
    const double* pv = v.data();
    for (int i = 0; i < sa.rows; ++i)
        for (int j = 0; j < sa.cols; ++j)
            n.own_val[static_cast<std::size_t>(i * sa.cols + j)] = pa[i * sa.cols + j] * pv[j];
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::concat_cols(const std::vector<DTensor>& parts) {
    if (parts.empty()) throw ContractError("concat_cols: no parts");
    const int rows = parts.front().shape().rows;
    int cols = 0;
    Node n;
    n.op = Op::kConcatCols;
    for (const auto& p : parts) {
        require(p.shape().rows == rows, "concat_cols", parts.front().shape(), p.shape());
        cols += p.shape().cols;
        n.parents.push_back(p.id());
        n.needs_grad = n.needs_grad || at(p.id()).needs_grad;
    }
    n.shape = {rows, cols};
    n.own_val.resize(static_cast<std::size_t>(n.shape.size()));
    int off = 0;
    for (const auto& p : parts) {
        const Shape sp = p.shape();
        const double* pp = p.data();
        for (int i = 0; i < rows; ++i)
            std::memcpy(n.own_val.data() + static_cast<std::size_t>(i) * cols + off,
                        pp + static_cast<std::size_t>(i) * sp.cols,
                        static_cast<std::size_t>(sp.cols) * sizeof(double));
        off += sp.cols;
    }
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::concat_rows(const std::vector<DTensor>& parts) {
    if (parts.empty()) throw ContractError("concat_rows: no parts");
    const int cols = parts.front().shape().cols;
    int rows = 0;
    Node n;
    n.op = Op::kConcatRows;
    for (const auto& p : parts) {
        require(p.shape().cols == cols, "concat_rows", parts.front().shape(), p.shape());
        rows += p.shape().rows;
        n.parents.push_back(p.id());
        n.needs_grad = n.needs_grad || at(p.id()).needs_grad;
    }
    n.shape = {rows, cols};
    n.own_val.resize(static_cast<std::size_t>(n.shape.size()));
    double* out = n.own_val.data();
    for (const auto& p : parts) {
        const int sz = p.shape().size();
        std::memcpy(out, p.data(), static_cast<std::size_t>(sz) * sizeof(double));
        out += sz;
    }
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::gather_rows(DTensor a, std::vector<int> rows) {
    const Shape sa = a.shape();
    for (int r : rows)
        if (r < 0 || r >= sa.rows)
            throw ShapeError("gather_rows: row " + std::to_string(r) + " out of range for " +
                             sa.str());
    Node n;
    n.shape = {static_cast<int>(rows.size()), sa.cols};
    n.op = Op::kGatherRows;
    n.a = a.id();
    n.needs_grad = at(a.id()).needs_grad;
    n.indices = std::move(rows);
    n.own_val.resize(static_cast<std::size_t>(n.shape.size()));
    const double* pa = a.data();
    for (std::size_t k = 0; k < n.indices.size(); ++k)
        std::memcpy(n.own_val.data() + k * static_cast<std::size_t>(sa.cols),
                    pa + static_cast<std::size_t>(n.indices[k]) * sa.cols,
                    static_cast<std::size_t>(sa.cols) * sizeof(double));
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::row_softmax(DTensor a) {
    const Shape sa = a.shape();
    Node n;
    n.shape = sa;
    n.op = Op::kRowSoftmax;
    n.a = a.id();
    n.needs_grad = at(a.id()).needs_grad;
    n.own_val.resize(static_cast<std::size_t>(sa.size()));
    const double* pa = a.data();
    for (int i = 0; i < sa.rows; ++i) {
        const double* row = pa + static_cast<std::size_t>(i) * sa.cols;
        double* out = n.own_val.data() + static_cast<std::size_t>(i) * sa.cols;
        double mx = row[0];
        for (int j = 1; j < sa.cols; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (int j = 0; j < sa.cols; ++j) {
            out[j] = std::exp(row[j] - mx);
            sum += out[j];
        }
        for (int j = 0; j < sa.cols; ++j) out[j] /= sum;
    }
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::relu(DTensor a) {
    const Shape sa = a.shape();
    Node n;
    n.shape = sa;
    n.op = Op::kRelu;
    n.a = a.id();
    n.needs_grad = at(a.id()).needs_grad;
    n.own_val.resize(static_cast<std::size_t>(sa.size()));
    const double* pa = a.data();
    for (int i = 0; i < sa.size(); ++i)
        n.own_val[static_cast<std::size_t>(i)] = pa[i] > 0.0 ? pa[i] : 0.0;
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::sigmoid(DTensor a) {
    const Shape sa = a.shape();
    Node n;
    n.shape = sa;
    n.op = Op::kSigmoid;
    n.a = a.id();
    n.needs_grad = at(a.id()).needs_grad;
    n.own_val.resize(static_cast<std::size_t>(sa.size()));
    const double* pa = a.data();
    for (int i = 0; i < sa.size(); ++i)
        n.own_val[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::exp(-pa[i]));
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::log(DTensor a, double min_arg) {
    const Shape sa = a.shape();
    Node n;
    n.shape = sa;
    n.op = Op::kLog;
    n.a = a.id();
    n.needs_grad = at(a.id()).needs_grad;
    n.s0 = min_arg;
    n.own_val.resize(static_cast<std::size_t>(sa.size()));
    const double* pa = a.data();
    for (int i = 0; i < sa.size(); ++i)
        n.own_val[static_cast<std::size_t>(i)] = std::log(std::max(pa[i], min_arg));
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::mean_rows(DTensor a) {
    const Shape sa = a.shape();
    if (sa.rows < 1) throw ContractError("mean_rows: empty input");
    Node n;
    n.shape = {1, sa.cols};
    n.op = Op::kMeanRows;
    n.a = a.id();
    n.needs_grad = at(a.id()).needs_grad;
    n.own_val.assign(static_cast<std::size_t>(sa.cols), 0.0);
    const double* pa = a.data();
    for (int i = 0; i < sa.rows; ++i)
        for (int j = 0; j < sa.cols; ++j)
            n.own_val[static_cast<std::size_t>(j)] += pa[i * sa.cols + j];
    for (int j = 0; j < sa.cols; ++j) n.own_val[static_cast<std::size_t>(j)] /= sa.rows;
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::mean_all(DTensor a) {
    const Shape sa = a.shape();
    if (sa.size() < 1) throw ContractError("mean_all: empty input");
    Node n;
    n.shape = {1, 1};
    n.op = Op::kMeanAll;
    n.a = a.id();
    n.needs_grad = at(a.id()).needs_grad;
    double sum = 0.0;
    const double* pa = a.data();
    for (int i = 0; i < sa.size(); ++i) sum += pa[i];
    n.own_val.assign(1, sum / sa.size());
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::affine(DTensor a, double s, double t) {
    const Shape sa = a.shape();
    Node n;
    n.shape = sa;
    n.op = Op::kAffine;
    n.a = a.id();
    n.needs_grad = at(a.id()).needs_grad;
    n.s0 = s;
    n.s1 = t;
    n.own_val.resize(static_cast<std::size_t>(sa.size()));
    const double* pa = a.data();
    for (int i = 0; i < sa.size(); ++i) n.own_val[static_cast<std::size_t>(i)] = s * pa[i] + t;
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::layer_norm(DTensor a, DTensor gain, DTensor bias, double eps) {
    const Shape sa = a.shape(), sg = gain.shape(), sb = bias.shape();
    require(sg.rows == 1 && sg.cols == sa.cols, "layer_norm", sa, sg);
    require(sb.rows == 1 && sb.cols == sa.cols, "layer_norm", sa, sb);
    Node n;
    n.shape = sa;
    n.op = Op::kLayerNorm;
    n.a = a.id();
    n.b = gain.id();
    n.c = bias.id();
    n.needs_grad = at(a.id()).needs_grad || at(gain.id()).needs_grad || at(bias.id()).needs_grad;
    n.s0 = eps;
    n.own_val.resize(static_cast<std::size_t>(sa.size()));
    // aux: normalized values (m*n) followed by per-row inverse stddev (m)
    n.aux.resize(static_cast<std::size_t>(sa.size() + sa.rows));
    const double* pa = a.data();
    const double* pg = gain.data();
    const double* pb = bias.data();
    for (int i = 0; i < sa.rows; ++i) {
        const double* row = pa + static_cast<std::size_t>(i) * sa.cols;
        double mu = 0.0;
        for (int j = 0; j < sa.cols; ++j) mu += row[j];
        mu /= sa.cols;
        double var = 0.0;
        for (int j = 0; j < sa.cols; ++j) var += (row[j] - mu) * (row[j] - mu);
        var /= sa.cols;
        const double inv_std = 1.0 / std::sqrt(var + eps);
        n.aux[static_cast<std::size_t>(sa.size() + i)] = inv_std;
        for (int j = 0; j < sa.cols; ++j) {
            const double xh = (row[j] - mu) * inv_std;
            n.aux[static_cast<std::size_t>(i * sa.cols + j)] = xh;
            n.own_val[static_cast<std::size_t>(i * sa.cols + j)] = xh * pg[j] + pb[j];
        }
    }
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::pair_score(DTensor q, DTensor k, DTensor p) {
    const Shape sq = q.shape(), sk = k.shape(), sp = p.shape();
    require(sq == sk, "pair_score", sq, sk);
    require(sp.rows == sq.rows * sq.rows && sp.cols == sq.cols, "pair_score", sp, sq);
    const int nn = sq.rows, h = sq.cols;
    Node n;
    n.shape = sp;
    n.op = Op::kPairScore;
    n.a = q.id();
    n.b = k.id();
    n.c = p.id();
    n.needs_grad = at(q.id()).needs_grad || at(k.id()).needs_grad || at(p.id()).needs_grad;
    n.own_val.resize(static_cast<std::size_t>(sp.size()));
    const double* pq = q.data();
    const double* pk = k.data();
    const double* pp = p.data();
    for (int i = 0; i < nn; ++i)
        for (int j = 0; j < nn; ++j) {
            const double* qi = pq + static_cast<std::size_t>(i) * h;
            const double* kj = pk + static_cast<std::size_t>(j) * h;
            const double* pij = pp + static_cast<std::size_t>(i * nn + j) * h;
            double* out = n.own_val.data() + static_cast<std::size_t>(i * nn + j) * h;
            for (int c = 0; c < h; ++c) {
                const double v = qi[c] * kj[c] + pij[c];
                out[c] = v > 0.0 ? v : 0.0;
            }
        }
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::attn_gather(DTensor alpha, DTensor s) {
    const Shape sal = alpha.shape(), ss = s.shape();
    require(sal.rows == sal.cols, "attn_gather", sal, ss);
    require(ss.rows == sal.rows * sal.rows, "attn_gather", sal, ss);
    const int nn = sal.rows, h = ss.cols;
    Node n;
    n.shape = {nn, h};
    n.op = Op::kAttnGather;
    n.a = alpha.id();
    n.b = s.id();
    n.needs_grad = at(alpha.id()).needs_grad || at(s.id()).needs_grad;
    n.own_val.assign(static_cast<std::size_t>(nn) * h, 0.0);
    const double* pa = alpha.data();
    const double* ps = s.data();
    for (int i = 0; i < nn; ++i) {
        double* out = n.own_val.data() + static_cast<std::size_t>(i) * h;
        for (int j = 0; j < nn; ++j) {
            const double w = pa[i * nn + j];
            const double* sij = ps + static_cast<std::size_t>(i * nn + j) * h;
            for (int c = 0; c < h; ++c) out[c] += w * sij[c];
        }
    }
    n.val = n.own_val.data();
    return {this, push(std::move(n))};
}

DTensor Tape::reshape(DTensor a, Shape s) {
    const Shape sa = a.shape();
    require(sa.size() == s.size(), "reshape", sa, s);
    Node n;
    n.shape = s;
    n.op = Op::kReshape;
    n.a = a.id();
    n.needs_grad = at(a.id()).needs_grad;
    n.val = a.data();  // same storage, new shape
    return {this, push(std::move(n))};
}

void Tape::backward(DTensor root) {
    if (root.id() < 0 || root.id() >= static_cast<int>(nodes_.size()))
        throw ContractError("backward: root is not on this tape");
    if (!(root.shape() == Shape{1, 1}))
        throw ContractError("backward: root must be scalar, got " + root.shape().str());
    if (nodes_.empty()) throw ContractError("backward: empty tape");
    Node& r = at(root.id());
    if (!r.needs_grad) return;  // no parameters reachable
    r.grad.assign(1, 1.0);
    for (int id = root.id(); id >= 0; --id) {
        if (!at(id).grad.empty()) backward_node(id);
    }
}

void Tape::backward_node(int id) {
    Node& n = at(id);
    const double* dy = n.grad.data();
    switch (n.op) {
        case Op::kLeaf:
        case Op::kConstant:
            break;
        case Op::kMatmul: {
            const Node& na = at(n.a);
            const Node& nb = at(n.b);
            if (double* da = grad_buffer(n.a))
                MutMap(da, na.shape.rows, na.shape.cols).noalias() +=
                    ConstMap(dy, n.shape.rows, n.shape.cols) *
                    ConstMap(nb.val, nb.shape.rows, nb.shape.cols).transpose();
            if (double* db = grad_buffer(n.b))
                MutMap(db, nb.shape.rows, nb.shape.cols).noalias() +=
                    ConstMap(na.val, na.shape.rows, na.shape.cols).transpose() *
                    ConstMap(dy, n.shape.rows, n.shape.cols);
            break;
        }
        case Op::kAdd: {
            if (double* da = grad_buffer(n.a))
                for (int i = 0; i < n.shape.size(); ++i) da[i] += dy[i];
            if (double* db = grad_buffer(n.b))
                for (int i = 0; i < n.shape.size(); ++i) db[i] += dy[i];
            break;
        }
        case Op::kMul: {
            const double* pa = at(n.a).val;
            const double* pb = at(n.b).val;
            if (double* da = grad_buffer(n.a))
                for (int i = 0; i < n.shape.size(); ++i) da[i] += dy[i] * pb[i];
            if (double* db = grad_buffer(n.b))
                for (int i = 0; i < n.shape.size(); ++i) db[i] += dy[i] * pa[i];
            break;
        }
        case Op::kRowvecAdd: {
            if (double* da = grad_buffer(n.a))
                for (int i = 0; i < n.shape.size(); ++i) da[i] += dy[i];
            if (double* dv = grad_buffer(n.b))
                for (int i = 0; i < n.shape.rows; ++i)
                    for (int j = 0; j < n.shape.cols; ++j) dv[j] += dy[i * n.shape.cols + j];
            break;
        }
        case Op::kRowvecMul: {
            const double* pa = at(n.a).val;
            const double* pv = at(n.b).val;
            if (double* da = grad_buffer(n.a))
                for (int i = 0; i < n.shape.rows; ++i)
                    for (int j = 0; j < n.shape.cols; ++j)
                        da[i * n.shape.cols + j] += dy[i * n.shape.cols + j] * pv[j];
            if (double* dv = grad_buffer(n.b))
                for (int i = 0; i < n.shape.rows; ++i)
                    for (int j = 0; j < n.shape.cols; ++j)
                        dv[j] += dy[i * n.shape.cols + j] * pa[i * n.shape.cols + j];
            break;
        }
        case Op::kConcatCols: {
            int off = 0;
            for (int pid : n.parents) {
                const Shape sp = at(pid).shape;
                if (double* dp = grad_buffer(pid)) {
                    for (int i = 0; i < sp.rows; ++i)
                        for (int j = 0; j < sp.cols; ++j)
                            dp[i * sp.cols + j] += dy[i * n.shape.cols + off + j];
                }
                off += sp.cols;
            }
            break;
        }
        case Op::kConcatRows: {
            int off = 0;
            for (int pid : n.parents) {
                const Shape sp = at(pid).shape;
                if (double* dp = grad_buffer(pid))
                    for (int i = 0; i < sp.size(); ++i) dp[i] += dy[off + i];
                off += sp.size();
            }
            break;
        }
        case Op::kGatherRows: {
            if (double* da = grad_buffer(n.a)) {
                const int cols = n.shape.cols;
                for (std::size_t k = 0; k < n.indices.size(); ++k)
                    for (int j = 0; j < cols; ++j)
                        da[n.indices[k] * cols + j] += dy[static_cast<int>(k) * cols + j];
            }
            break;
        }
        case Op::kRowSoftmax: {
            if (double* da = grad_buffer(n.a)) {
                for (int i = 0; i < n.shape.rows; ++i) {
                    const double* y = n.val + static_cast<std::size_t>(i) * n.shape.cols;
                    const double* g = dy + static_cast<std::size_t>(i) * n.shape.cols;
                    double dot = 0.0;
                    for (int j = 0; j < n.shape.cols; ++j) dot += g[j] * y[j];
                    for (int j = 0; j < n.shape.cols; ++j)
                        da[i * n.shape.cols + j] += y[j] * (g[j] - dot);
                }
            }
            break;
        }
        case Op::kRelu: {
            if (double* da = grad_buffer(n.a))
                for (int i = 0; i < n.shape.size(); ++i)
                    if (n.val[i] > 0.0) da[i] += dy[i];
            break;
        }
        case Op::kSigmoid: {
            if (double* da = grad_buffer(n.a))
                for (int i = 0; i < n.shape.size(); ++i)
                    da[i] += dy[i] * n.val[i] * (1.0 - n.val[i]);
            break;
        }
        case Op::kLog: {
            if (double* da = grad_buffer(n.a)) {
                const double* pa = at(n.a).val;
                for (int i = 0; i < n.shape.size(); ++i)
                    da[i] += dy[i] / std::max(pa[i], n.s0);
            }
            break;
        }
        case Op::kMeanRows: {
            if (double* da = grad_buffer(n.a)) {
                const Shape sa = at(n.a).shape;
                for (int i = 0; i < sa.rows; ++i)
                    for (int j = 0; j < sa.cols; ++j) da[i * sa.cols + j] += dy[j] / sa.rows;
            }
            break;
        }
        case Op::kMeanAll: {
            if (double* da = grad_buffer(n.a)) {
                const int sz = at(n.a).shape.size();
                for (int i = 0; i < sz; ++i) da[i] += dy[0] / sz;
            }
            break;
        }
        case Op::kAffine: {
            if (double* da = grad_buffer(n.a))
                for (int i = 0; i < n.shape.size(); ++i) da[i] += n.s0 * dy[i];
            break;
        }
        case Op::kLayerNorm: {
            const int rows = n.shape.rows, cols = n.shape.cols;
            const double* xhat = n.aux.data();
            const double* inv_std = n.aux.data() + n.shape.size();
            const double* pg = at(n.b).val;
            double* da = grad_buffer(n.a);
            double* dg = grad_buffer(n.b);
            double* db = grad_buffer(n.c);
            for (int i = 0; i < rows; ++i) {
                const double* gi = dy + static_cast<std::size_t>(i) * cols;
                const double* xi = xhat + static_cast<std::size_t>(i) * cols;
                if (dg || db) {
                    for (int j = 0; j < cols; ++j) {
                        if (dg) dg[j] += gi[j] * xi[j];
                        if (db) db[j] += gi[j];
                    }
                }
                if (da) {
                    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                    for (int j = 0; j < cols; ++j) {
                        const double dxh = gi[j] * pg[j];
                        mean_dxhat += dxh;
                        mean_dxhat_xhat += dxh * xi[j];
                    }
                    mean_dxhat /= cols;
                    mean_dxhat_xhat /= cols;
                    for (int j = 0; j < cols; ++j) {
                        const double dxh = gi[j] * pg[j];
                        da[i * cols + j] +=
                            inv_std[i] * (dxh - mean_dxhat - xi[j] * mean_dxhat_xhat);
                    }
                }
            }
            break;
        }
        case Op::kPairScore: {
            const Node& nq = at(n.a);
            const int nn = nq.shape.rows, h = nq.shape.cols;
            const double* pq = nq.val;
            const double* pk = at(n.b).val;
            double* dq = grad_buffer(n.a);
            double* dk = grad_buffer(n.b);
            double* dp = grad_buffer(n.c);
            for (int i = 0; i < nn; ++i)
                for (int j = 0; j < nn; ++j) {
                    const std::size_t base = static_cast<std::size_t>(i * nn + j) * h;
                    const double* out = n.val + base;
                    const double* g = dy + base;
                    for (int c = 0; c < h; ++c) {
                        if (out[c] <= 0.0) continue;  // relu mask
                        const double gm = g[c];
                        if (dq) dq[i * h + c] += gm * pk[j * h + c];
                        if (dk) dk[j * h + c] += gm * pq[i * h + c];
                        if (dp) dp[base + c] += gm;
                    }
                }
            break;
        }
        case Op::kAttnGather: {
            const Node& nal = at(n.a);
            const int nn = nal.shape.rows, h = n.shape.cols;
            const double* pa = nal.val;
            const double* ps = at(n.b).val;
            double* dal = grad_buffer(n.a);
            double* ds = grad_buffer(n.b);
            for (int i = 0; i < nn; ++i) {
                const double* gi = dy + static_cast<std::size_t>(i) * h;
                for (int j = 0; j < nn; ++j) {
                    const std::size_t base = static_cast<std::size_t>(i * nn + j) * h;
                    if (dal) {
                        double dot = 0.0;
                        for (int c = 0; c < h; ++c) dot += gi[c] * ps[base + c];
                        dal[i * nn + j] += dot;
                    }
                    if (ds) {
                        const double w = pa[i * nn + j];
                        for (int c = 0; c < h; ++c) ds[base + c] += w * gi[c];
                    }
                }
            }
            break;
        }
        case Op::kReshape: {
            if (double* da = grad_buffer(n.a))
                for (int i = 0; i < n.shape.size(); ++i) da[i] += dy[i];
            break;
        }
    }
}

FiniteDiffResult finite_diff_check(const std::function<double()>& eval,
                                   const std::vector<FiniteDiffEntry>& entries, double h) {
    if (!(h >= 1e-7 && h <= 1e-3))
        throw ArgError("finite_diff_check: h must be in [1e-7, 1e-3]");
    const double base1 = eval();
    const double base2 = eval();
    if (std::memcmp(&base1, &base2, sizeof(double)) != 0)
        throw ContractError("finite_diff_check: eval is not deterministic");

    FiniteDiffResult res;
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const auto& entry = entries[e];
        for (int i = 0; i < entry.size; ++i) {
            const double orig = entry.values[i];
            entry.values[i] = orig + h;
            const double fp = eval();
            entry.values[i] = orig - h;
            const double fm = eval();
            entry.values[i] = orig;
            const double fd = (fp - fm) / (2.0 * h);
            const double an = entry.analytic[i];
            const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
            const double rel = std::abs(fd - an) / denom;
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst_entry = static_cast<int>(e);
                res.worst_coord = i;
            }
        }
    }
    return res;
}

}  // namespace gladformer::ad
