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

#ifndef PMA_OPTIM_H_
#define PMA_OPTIM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "pma/tensor.h"

namespace pma {

struct AdamWOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Moments for one parameter list; entry i belongs to params[i].
template <typename T>
struct AdamWState {
  AdamWState(AdamWOptions options, std::span<const Tensor<T>> params);

  AdamWOptions options;
  int64_t step = 0;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
};

// Decoupled weight decay: p <- p - lr*wd*p, then the bias-corrected Adam
// update. grads[i] must match params[i] element for element.
template <typename T>
void AdamWStep(AdamWState<T>& state, std::span<Tensor<T>> params,
               std::span<const std::vector<T>> grads);

// Leaves without a gradient are treated as receiving zeros.
template <typename T>
void AdamWStep(AdamWState<T>& state, std::span<Tensor<T>> params,
               const Gradients<T>& grads);

}  // namespace pma

#endif  // PMA_OPTIM_H_
