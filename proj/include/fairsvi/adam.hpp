#pragma once

#include <map>
#include <string>
#include <vector>

#include "fairsvi/tape.hpp"
#include "fairsvi/tensor.hpp"

namespace fairsvi {

/// Named model parameters. std::map keeps iteration order deterministic,
/// which makes whole training runs reproducible.
struct ParamStore {
    std::map<std::string, Tensor> values;

    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    bool has(const std::string& name) const { return values.count(name) > 0; }
    void insert(const std::string& name, Tensor t);
    std::vector<std::string> names() const;
};

/// Tape leaves for every parameter of a store, for one forward/backward pass.
struct BoundParams {
    std::map<std::string, Value> vals;
    Value at(const std::string& name) const;
};

BoundParams bind(Tape& tape, const ParamStore& params);

using GradMap = std::map<std::string, Tensor>;

/// Read accumulated gradients for every bound parameter after backward().
GradMap collect_grads(const Tape& tape, const BoundParams& bound);

struct AdamConfig {
    double step_size = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    long step = 0;
    std::map<std::string, Tensor> m;  // first moments
    std::map<std::string, Tensor> v;  // second moments
};

/// One bias-corrected Adam update. Parameters without an entry in `grads`
/// are left untouched. Throws DivergenceError on a non-finite gradient,
/// naming the offending parameter.
void adam_step(ParamStore& params, const GradMap& grads, AdamState& state);

}  // namespace fairsvi
