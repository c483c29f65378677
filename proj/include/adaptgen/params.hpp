#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "adaptgen/graph.hpp"
#include "adaptgen/rng.hpp"

namespace adaptgen {

// Total assignment of trainable/frozen to every tensor. Adapter tensors are
// the ones whose name contains ".adapter.".
enum class FreezePolicy {
  AllTrainable,
  AdapterOnly,
  AdapterFrozen,
};

inline const char* to_string(FreezePolicy p) {
  switch (p) {
    case FreezePolicy::AllTrainable: return "ALL_TRAINABLE";
    case FreezePolicy::AdapterOnly: return "ADAPTER_ONLY";
    case FreezePolicy::AdapterFrozen: return "ADAPTER_FROZEN";
  }
  return "?";
}

inline bool is_adapter_tensor(const std::string& name) {
  return name.find(".adapter.") != std::string::npos;
}

template <class Scalar>
struct NamedTensor {
  std::string name;
  Matrix<Scalar> value;
  bool trainable = true;
};

// Ordered collection of named tensors. Creation order is the deterministic
// iteration, initialization, and serialization order.
template <class Scalar>
class ParamStore {
 public:
  using Mat = Matrix<Scalar>;

  Mat& add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    if (index_.count(name)) throw std::runtime_error("duplicate tensor name: " + name);
    index_[name] = tensors_.size();
    tensors_.push_back(NamedTensor<Scalar>{name, Mat::Zero(rows, cols), true});
    return tensors_.back().value;
  }

  Mat& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::runtime_error("unknown tensor: " + name);
    return tensors_[it->second].value;
  }
  const Mat& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::runtime_error("unknown tensor: " + name);
    return tensors_[it->second].value;
  }

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  bool trainable(const std::string& name) const { return tensors_[index_.at(name)].trainable; }

  std::vector<NamedTensor<Scalar>>& tensors() { return tensors_; }
  const std::vector<NamedTensor<Scalar>>& tensors() const { return tensors_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
    return n;
  }

  void apply_freeze_policy(FreezePolicy policy) {
    std::size_t trainable = 0;
    for (auto& t : tensors_) {
      switch (policy) {
        case FreezePolicy::AllTrainable: t.trainable = true; break;
        case FreezePolicy::AdapterOnly: t.trainable = is_adapter_tensor(t.name); break;
        case FreezePolicy::AdapterFrozen: t.trainable = !is_adapter_tensor(t.name); break;
      }
      trainable += t.trainable ? 1 : 0;
    }
    if (trainable == 0) {
      throw std::runtime_error(std::string("freeze policy ") + to_string(policy) +
                               " leaves no trainable tensor");
    }
  }

  // Glorot-uniform fill in creation order. Tensors listed in zero_names stay
  // at zero.
  void init_glorot(DeterministicRng& rng, const std::vector<std::string>& zero_names = {},
                   const std::vector<std::string>& one_names = {}) {
    auto listed = [](const std::vector<std::string>& names, const std::string& n) {
      for (const auto& x : names)
        if (x == n) return true;
      return false;
    };
    for (auto& t : tensors_) {
      if (listed(zero_names, t.name)) continue;
      if (listed(one_names, t.name)) {
        t.value.setOnes();
        continue;
      }
      const double a = std::sqrt(6.0 / static_cast<double>(t.value.rows() + t.value.cols()));
      for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.value.cols(); ++c) {
          t.value(r, c) = static_cast<Scalar>(rng.symmetric(a));
        }
      }
    }
  }

  std::uint64_t checksum(const std::string& name) const {
    const Mat& m = tensors_[index_.at(name)].value;
    return fnv1a(m.data(), sizeof(Scalar) * static_cast<std::size_t>(m.size()));
  }

 private:
  std::vector<NamedTensor<Scalar>> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Gradient accumulator keyed by tensor name.
template <class Scalar>
class GradMap {
 public:
  using Mat = Matrix<Scalar>;

  void accumulate(const std::string& name, const Mat& g) {
    auto it = grads_.find(name);
    if (it == grads_.end()) {
      grads_.emplace(name, g);
    } else {
      it->second += g;
    }
  }

  void scale(Scalar s) {
    for (auto& [name, g] : grads_) g *= s;
  }

  const Mat* find(const std::string& name) const {
    auto it = grads_.find(name);
    return it == grads_.end() ? nullptr : &it->second;
  }

  void clear() { grads_.clear(); }

 private:
  std::map<std::string, Mat> grads_;
};

}  // namespace adaptgen
