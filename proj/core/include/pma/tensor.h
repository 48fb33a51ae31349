// Copyright 2026 The PMA-URL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PMA_TENSOR_H_
#define PMA_TENSOR_H_

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace pma {

using Shape = std::vector<int64_t>;

int64_t NumElements(const Shape& shape);
std::string ShapeString(const Shape& shape);

namespace internal {

// One value in the computation graph. Leaves have no parents; op outputs keep
// their parents alive until Backward frees the graph.
template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  // Scratch gradient, populated only while Backward runs.
  std::vector<T> grad;
  bool requires_grad = false;
  bool is_leaf = true;
  const char* op = "leaf";
  uint64_t visit_mark = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  bool ParentNeedsGrad(size_t i) const { return parents[i]->requires_grad; }
  // Gradient buffer of parent i, zero-initialised on first use.
  std::span<T> ParentGrad(size_t i) {
    auto& g = parents[i]->grad;
    if (g.empty()) g.assign(parents[i]->data.size(), T(0));
    return g;
  }
};

}  // namespace internal

// Dense row-major array with reverse-mode autodiff. A Tensor is a cheap handle;
// copies share the same node. Values produced by ops are never mutated. Only
// leaves (parameters) may be updated in place, and only between graphs.
template <typename T>
class Tensor {
 public:
  using Scalar = T;

  Tensor() = default;
  explicit Tensor(std::shared_ptr<internal::Node<T>> node)
      : node_(std::move(node)) {}

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor Full(Shape shape, T value, bool requires_grad = false);
  static Tensor FromData(Shape shape, std::vector<T> data,
                         bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  // Negative axes count from the end.
  int64_t dim(int axis) const;
  size_t size() const { return node_->data.size(); }
  std::span<const T> data() const { return node_->data; }
  // Leaves only; throws for op outputs.
  std::span<T> mutable_data();
  T item() const;
  T at(std::initializer_list<int64_t> index) const;
  bool requires_grad() const { return node_->requires_grad; }
  const char* op() const { return node_->op; }

  // Same values, no graph connection.
  Tensor Detach() const;
  const void* id() const { return node_.get(); }
  const std::shared_ptr<internal::Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<internal::Node<T>> node_;
};

// Gradient of a scalar loss with respect to every leaf that requires grad.
template <typename T>
class Gradients {
 public:
  bool Has(const Tensor<T>& leaf) const { return grads_.count(leaf.id()) > 0; }
  // Empty span when the leaf did not receive a gradient.
  std::span<const T> Get(const Tensor<T>& leaf) const;
  // Zeros when the leaf did not receive a gradient.
  Tensor<T> AsTensor(const Tensor<T>& leaf) const;
  size_t size() const { return grads_.size(); }
  void Set(const void* key, std::vector<T> grad) {
    grads_[key] = std::move(grad);
  }

 private:
  std::unordered_map<const void*, std::vector<T>> grads_;
};

// Runs reverse-mode differentiation from a single-element loss and frees the
// graph. Graphs that share leaves must not be differentiated concurrently.
template <typename T>
Gradients<T> Backward(const Tensor<T>& loss);

// While alive, ops on this thread record no graph edges.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool GradEnabled();

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class Gradients<float>;
extern template class Gradients<double>;

}  // namespace pma

#endif  // PMA_TENSOR_H_
