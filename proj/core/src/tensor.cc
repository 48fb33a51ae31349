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

#include "pma/tensor.h"

#include <cmath>
#include <atomic>
#include <sstream>
#include <utility>

#include "pma/errors.h"

namespace pma {
namespace {

thread_local bool grad_enabled = true;
std::atomic<uint64_t> next_visit_mark{1};

}  // namespace

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape& shape) {
  std::ostringstream out;
  out << "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ",";
    out << shape[i];
  }
  out << ")";
  return out.str();
}

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }
bool GradEnabled() { return grad_enabled; }

template <typename T>
Tensor<T> Tensor<T>::Zeros(Shape shape, bool requires_grad) {
  return Full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::Full(Shape shape, T value, bool requires_grad) {
  std::vector<T> data(static_cast<size_t>(NumElements(shape)), value);
  return FromData(std::move(shape), std::move(data), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::FromData(Shape shape, std::vector<T> data,
                              bool requires_grad) {
  for (int64_t d : shape) {
    if (d < 0) {
      throw Error(ErrorCode::kShapeMismatch,
                  "negative extent in " + ShapeString(shape));
    }
  }
  if (NumElements(shape) != static_cast<int64_t>(data.size())) {
    throw Error(ErrorCode::kShapeMismatch,
                "shape " + ShapeString(shape) + " does not hold " +
                    std::to_string(data.size()) + " values");
  }
  for (size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "leaf value " + std::to_string(i) + " is not finite");
    }
  }
  auto node = std::make_shared<internal::Node<T>>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

template <typename T>
int64_t Tensor<T>::dim(int axis) const {
  int r = rank();
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) {
    throw Error(ErrorCode::kShapeMismatch,
                "axis " + std::to_string(axis) + " out of range for " +
                    ShapeString(shape()));
  }
  return node_->shape[static_cast<size_t>(axis)];
}

template <typename T>
std::span<T> Tensor<T>::mutable_data() {
  if (!node_->is_leaf) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("cannot mutate output of op ") + node_->op);
  }
  return node_->data;
}

template <typename T>
T Tensor<T>::item() const {
  if (size() != 1) {
    throw Error(ErrorCode::kShapeMismatch,
                "item() on tensor of shape " + ShapeString(shape()));
  }
  return node_->data[0];
}

template <typename T>
T Tensor<T>::at(std::initializer_list<int64_t> index) const {
  if (index.size() != shape().size()) {
    throw Error(ErrorCode::kShapeMismatch, "index rank mismatch");
  }
  int64_t offset = 0;
  size_t axis = 0;
  for (int64_t i : index) {
    int64_t extent = shape()[axis++];
    if (i < 0 || i >= extent) {
      throw Error(ErrorCode::kIdOutOfRange, "index out of range");
    }
    offset = offset * extent + i;
  }
  return node_->data[static_cast<size_t>(offset)];
}

template <typename T>
Tensor<T> Tensor<T>::Detach() const {
  return FromData(shape(), node_->data, false);
}

template <typename T>
std::span<const T> Gradients<T>::Get(const Tensor<T>& leaf) const {
  auto it = grads_.find(leaf.id());
  if (it == grads_.end()) return {};
  return it->second;
}

template <typename T>
Tensor<T> Gradients<T>::AsTensor(const Tensor<T>& leaf) const {
  auto it = grads_.find(leaf.id());
  if (it == grads_.end()) return Tensor<T>::Zeros(leaf.shape());
  return Tensor<T>::FromData(leaf.shape(), it->second);
}

template <typename T>
Gradients<T> Backward(const Tensor<T>& loss) {
  using NodeT = internal::Node<T>;
  if (!loss.defined() || loss.size() != 1) {
    throw Error(ErrorCode::kNotScalarLoss,
                "loss must hold exactly one value, got shape " +
                    (loss.defined() ? ShapeString(loss.shape()) : "()"));
  }
  Gradients<T> result;
  NodeT* root = loss.node().get();
  if (!root->requires_grad) return result;

  // Iterative post-order DFS gives a topological order.
  uint64_t mark = next_visit_mark.fetch_add(1);
  std::vector<NodeT*> order;
  std::vector<std::pair<NodeT*, size_t>> stack;
  root->visit_mark = mark;
  stack.emplace_back(root, 0);
  while (!stack.empty()) {
    auto& [node, next_parent] = stack.back();
    if (next_parent < node->parents.size()) {
      NodeT* parent = node->parents[next_parent++].get();
      if (parent->requires_grad && parent->visit_mark != mark) {
        parent->visit_mark = mark;
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->grad.assign(1, T(1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeT* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }

  for (NodeT* node : order) {
    if (node->is_leaf) {
      if (node->grad.empty()) node->grad.assign(node->data.size(), T(0));
      result.Set(node, std::move(node->grad));
      node->grad = {};
    } else {
      node->grad = {};
      node->parents.clear();
      node->backward = nullptr;
    }
  }
  return result;
}

template class Tensor<float>;
template class Tensor<double>;
template class Gradients<float>;
template class Gradients<double>;
template Gradients<float> Backward(const Tensor<float>&);
template Gradients<double> Backward(const Tensor<double>&);

}  // namespace pma
