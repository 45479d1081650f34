#include "fairsvi/adam.hpp"

#include <cmath>

namespace fairsvi {

Tensor& ParamStore::at(const std::string& name) {
    auto it = values.find(name);
    if (it == values.end()) throw ContractError("unknown parameter: " + name);
    return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw ContractError("unknown parameter: " + name);
    return it->second;
}

void ParamStore::insert(const std::string& name, Tensor t) {
    if (has(name)) throw ContractError("duplicate parameter: " + name);
    values.emplace(name, std::move(t));
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(values.size());
    for (const auto& [k, v] : values) out.push_back(k);
    return out;
}

Value BoundParams::at(const std::string& name) const {
    auto it = vals.find(name);
    if (it == vals.end()) throw ContractError("unbound parameter: " + name);
    return it->second;
}

BoundParams bind(Tape& tape, const ParamStore& params) {
    BoundParams out;
    for (const auto& [name, tensor] : params.values) out.vals.emplace(name, tape.leaf(tensor));
    return out;
}

GradMap collect_grads(const Tape& tape, const BoundParams& bound) {
    GradMap out;
    for (const auto& [name, value] : bound.vals) out.emplace(name, tape.grad(value));
    return out;
}

void adam_step(ParamStore& params, const GradMap& grads, AdamState& state) {
    state.step += 1;
    const double b1 = state.cfg.beta1;
    const double b2 = state.cfg.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

    for (const auto& [name, g] : grads) {
        if (!g.all_finite())
            throw DivergenceError(name, "non-finite gradient for parameter " + name);
        Tensor& p = params.at(name);
        if (!p.same_shape(g))
            throw DimensionError("adam_step: gradient shape " + g.shape_str() +
                                 " != parameter shape " + p.shape_str() + " for " + name);
        auto mit = state.m.find(name);
        if (mit == state.m.end()) {
            mit = state.m.emplace(name, Tensor::zeros_like(p)).first;
            state.v.emplace(name, Tensor::zeros_like(p));
        }
        Tensor& m = mit->second;
        Tensor& v = state.v.at(name);
        for (Index k = 0; k < p.size(); ++k) {
            m[k] = b1 * m[k] + (1.0 - b1) * g[k];
            v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            p[k] -= state.cfg.step_size * mhat / (std::sqrt(vhat) + state.cfg.eps);
        }
    }
}

}  // namespace fairsvi
