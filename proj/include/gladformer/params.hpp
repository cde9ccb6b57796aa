#pragma once

#include <string>
#include <vector>

#include "gladformer/autodiff.hpp"
#include "gladformer/rng.hpp"

namespace gladformer::nn {

enum class InitKind { kXavier, kZero, kOne };

struct Param {
    std::string name;
    ad::Shape shape;
    InitKind init = InitKind::kXavier;
    std::vector<double> value;
};

// Ordered registry of learnable parameters. Registration order is fixed by
// model construction, which makes seeded initialization deterministic.
class ParamStore {
  public:
    int add(std::string name, int rows, int cols, InitKind init = InitKind::kXavier);

    Param& operator[](int id) { return params_[static_cast<std::size_t>(id)]; }
    const Param& operator[](int id) const { return params_[static_cast<std::size_t>(id)]; }
    int size() const { return static_cast<int>(params_.size()); }
    std::int64_t coordinate_count() const;

    // id of a named parameter; throws ContractError if absent
    int find(const std::string& name) const;

    // uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases, unit gains
    void init(Rng rng);

    std::vector<Param>& all() { return params_; }
    const std::vector<Param>& all() const { return params_; }

  private:
    std::vector<Param> params_;
};

// Per-tape leaf handles, index-aligned with the store.
struct Binding {
    std::vector<ad::DTensor> leaves;
};

Binding bind_params(ad::Tape& tape, const ParamStore& store);

// Gradient accumulator aligned with a ParamStore.
class GradBuffer {
  public:
    explicit GradBuffer(const ParamStore& store);
    void zero();
    // adds scale * (tape gradients of the bound leaves)
    void accumulate(const ad::Tape& tape, const Binding& binding, double scale);
    void add(const GradBuffer& other);
    const std::vector<double>& grad(int id) const { return grads_[static_cast<std::size_t>(id)]; }
    std::vector<double>& grad(int id) { return grads_[static_cast<std::size_t>(id)]; }
    int size() const { return static_cast<int>(grads_.size()); }

  private:
    std::vector<std::vector<double>> grads_;
};

// Checkpoints are a JSON manifest of ordered (name, shape, row-major values)
// triples plus a format-version field.
void save_checkpoint(const ParamStore& store, const std::string& path);
void load_checkpoint(ParamStore& store, const std::string& path);

}  // namespace gladformer::nn
