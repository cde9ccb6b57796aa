#include "gladformer/params.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "gladformer/errors.hpp"

namespace gladformer::nn {

int ParamStore::add(std::string name, int rows, int cols, InitKind init) {
    if (rows < 1 || cols < 1)
        throw ArgError("param " + name + ": bad shape " + std::to_string(rows) + "x" +
                       std::to_string(cols));
    Param p;
    p.name = std::move(name);
    p.shape = {rows, cols};
    p.init = init;
    p.value.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    params_.push_back(std::move(p));
    return static_cast<int>(params_.size()) - 1;
}

std::int64_t ParamStore::coordinate_count() const {
    std::int64_t n = 0;
    for (const auto& p : params_) n += p.shape.size();
    return n;
}

int ParamStore::find(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
        if (params_[static_cast<std::size_t>(i)].name == name) return i;
    throw ContractError("no parameter named " + name);
}

void ParamStore::init(Rng rng) {
    for (auto& p : params_) {
        switch (p.init) {
            case InitKind::kXavier: {
                const double bound = std::sqrt(6.0 / (p.shape.rows + p.shape.cols));
                for (auto& v : p.value) v = rng.uniform(-bound, bound);
                break;
            }
            case InitKind::kZero:
                std::fill(p.value.begin(), p.value.end(), 0.0);
                break;
            case InitKind::kOne:
                std::fill(p.value.begin(), p.value.end(), 1.0);
                break;
        }
    }
}

Binding bind_params(ad::Tape& tape, const ParamStore& store) {
    Binding b;
    b.leaves.reserve(static_cast<std::size_t>(store.size()));
    for (const auto& p : store.all()) b.leaves.push_back(tape.leaf(p.shape, p.value.data()));
    return b;
}

GradBuffer::GradBuffer(const ParamStore& store) {
    grads_.resize(static_cast<std::size_t>(store.size()));
    for (int i = 0; i < store.size(); ++i)
        grads_[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(store[i].shape.size()),
                                                   0.0);
}

void GradBuffer::zero() {
    for (auto& g : grads_) std::fill(g.begin(), g.end(), 0.0);
}

void GradBuffer::accumulate(const ad::Tape& tape, const Binding& binding, double scale) {
    for (std::size_t i = 0; i < grads_.size(); ++i) {
        const double* g = tape.grad_of(binding.leaves[i].id());
        if (!g) continue;
        auto& acc = grads_[i];
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += scale * g[j];
    }
}

void GradBuffer::add(const GradBuffer& other) {
    for (std::size_t i = 0; i < grads_.size(); ++i) {
        const auto& src = other.grads_[i];
        auto& dst = grads_[i];
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
}

void save_checkpoint(const ParamStore& store, const std::string& path) {
    nlohmann::json j;
    j["format_version"] = 1;
    auto& arr = j["params"] = nlohmann::json::array();
    for (const auto& p : store.all()) {
        nlohmann::json e;
        e["name"] = p.name;
        e["shape"] = {p.shape.rows, p.shape.cols};
        e["values"] = p.value;
        arr.push_back(std::move(e));
    }
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write checkpoint " + path);
    out << j.dump();
}

void load_checkpoint(ParamStore& store, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open checkpoint " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("checkpoint " + path + ": " + e.what());
    }
    if (!j.contains("format_version") || j["format_version"].get<int>() != 1)
        throw FormatError("checkpoint " + path + ": unsupported format version");
    const auto& arr = j.at("params");
    if (static_cast<int>(arr.size()) != store.size())
        throw FormatError("checkpoint " + path + ": has " + std::to_string(arr.size()) +
                          " params, model expects " + std::to_string(store.size()));
    for (int i = 0; i < store.size(); ++i) {
        const auto& e = arr[static_cast<std::size_t>(i)];
        Param& p = store[i];
        if (e.at("name").get<std::string>() != p.name)
            throw FormatError("checkpoint " + path + ": param " + std::to_string(i) + " is '" +
                              e.at("name").get<std::string>() + "', model expects '" + p.name +
                              "'");
        const auto sh = e.at("shape");
        if (sh.size() != 2 || sh[0].get<int>() != p.shape.rows || sh[1].get<int>() != p.shape.cols)
            throw FormatError("checkpoint " + path + ": shape mismatch for " + p.name);
        const auto& vals = e.at("values");
        if (static_cast<int>(vals.size()) != p.shape.size())
            throw FormatError("checkpoint " + path + ": value count mismatch for " + p.name);
        for (std::size_t k = 0; k < vals.size(); ++k) p.value[k] = vals[k].get<double>();
    }
}

}  // namespace gladformer::nn
