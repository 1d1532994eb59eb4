#pragma once

#include "polyrecon/rng.hpp"
#include "polyrecon/tensor.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace polyrecon::nn {

struct AdamConfig {
  double lr = 1e-3;
  double weight_decay = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class S>
struct Param {
  std::vector<long> dims;
  std::shared_ptr<ArrayX<S>> value;
  ArrayX<S> grad;
  ArrayX<S> moment1;
  ArrayX<S> moment2;
  long step = 0;
};

// Named parameters plus per-parameter Adam state. The map is ordered so every
// iteration (gradient accumulation, optimizer step, checkpointing) is
// deterministic.
template <class S>
class ParameterStore {
 public:
  // Uniform Kaiming-style fan-in init: U(-b, b) with b = sqrt(6 / fan_in).
  Tensor<S> create(const std::string& name, std::vector<long> dims, long fan_in, Rng& rng) {
    Param<S>& p = insert(name, dims);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (long i = 0; i < p.value->size(); ++i) {
      (*p.value)[i] = static_cast<S>(rng.uniform(-bound, bound));
    }
    return leaf(name);
  }

  Tensor<S> create_zeros(const std::string& name, std::vector<long> dims) {
    insert(name, std::move(dims));
    return leaf(name);
  }

  bool contains(const std::string& name) const { return params_.count(name) > 0; }

  // Fresh leaf node aliasing the stored value; each forward pass gets its own
  // gradient buffer, so concurrent read-only passes never race.
  Tensor<S> leaf(const std::string& name) {
    Param<S>& p = at(name);
    return Tensor<S>::leaf_view(p.dims, p.value, true);
  }

  Param<S>& at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) raise(Errc::BadInput, "unknown parameter '" + name + "'");
    return it->second;
  }
  const Param<S>& at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) raise(Errc::BadInput, "unknown parameter '" + name + "'");
    return it->second;
  }

  std::map<std::string, Param<S>>& params() { return params_; }
  const std::map<std::string, Param<S>>& params() const { return params_; }

  void zero_grad() {
    for (auto& [name, p] : params_) p.grad.setZero();
  }

  void accumulate_grad(const std::string& name, const ArrayX<S>& grad) {
    Param<S>& p = at(name);
    if (grad.size() != p.grad.size()) raise(Errc::ShapeMismatch, "gradient size mismatch");
    p.grad += grad;
  }

  long parameter_count() const {
    long n = 0;
    for (const auto& [name, p] : params_) n += p.value->size();
    return n;
  }

 private:
  Param<S>& insert(const std::string& name, std::vector<long> dims) {
    if (params_.count(name)) raise(Errc::BadInput, "duplicate parameter '" + name + "'");
    Param<S> p;
    const long n = dims_size(dims);
    p.dims = std::move(dims);
    p.value = std::make_shared<ArrayX<S>>(ArrayX<S>::Zero(n));
    p.grad = ArrayX<S>::Zero(n);
    p.moment1 = ArrayX<S>::Zero(n);
    p.moment2 = ArrayX<S>::Zero(n);
    return params_.emplace(name, std::move(p)).first->second;
  }

  std::map<std::string, Param<S>> params_;
};

// Adam with decoupled weight decay; consumes the gradients accumulated in the
// store.
template <class S>
void adam_step(ParameterStore<S>& store, const AdamConfig& cfg = {}) {
  for (auto& [name, p] : store.params()) {
    if (runtime_checks() && !p.grad.allFinite()) {
      raise(Errc::NonFinite, "non-finite gradient for parameter '" + name + "'");
    }
    p.step += 1;
    const S b1 = static_cast<S>(cfg.beta1);
    const S b2 = static_cast<S>(cfg.beta2);
    p.moment1 = b1 * p.moment1 + (S(1) - b1) * p.grad;
    p.moment2 = b2 * p.moment2 + (S(1) - b2) * p.grad.square();
    const S corr1 = S(1) - static_cast<S>(std::pow(cfg.beta1, static_cast<double>(p.step)));
    const S corr2 = S(1) - static_cast<S>(std::pow(cfg.beta2, static_cast<double>(p.step)));
    const ArrayX<S> m_hat = p.moment1 / corr1;
    const ArrayX<S> v_hat = p.moment2 / corr2;
    *p.value -= static_cast<S>(cfg.lr) *
                (m_hat / (v_hat.sqrt() + static_cast<S>(cfg.eps)) +
                 static_cast<S>(cfg.weight_decay) * *p.value);
    if (runtime_checks() && !p.value->allFinite()) {
      raise(Errc::NonFinite, "non-finite value for parameter '" + name + "' after adam step");
    }
  }
}

}  // namespace polyrecon::nn
