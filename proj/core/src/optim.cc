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

#include "pma/optim.h"

#include <cmath>
#include <string>

#include "pma/errors.h"

namespace pma {

template <typename T>
AdamWState<T>::AdamWState(AdamWOptions opts, std::span<const Tensor<T>> params)
    : options(opts) {
  for (const auto& p : params) {
    first_moment.emplace_back(p.size(), T(0));
    second_moment.emplace_back(p.size(), T(0));
  }
}

template <typename T>
void AdamWStep(AdamWState<T>& state, std::span<Tensor<T>> params,
               std::span<const std::vector<T>> grads) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "adamw: " + std::to_string(params.size()) + " params, " +
                    std::to_string(grads.size()) + " grads, " +
                    std::to_string(state.first_moment.size()) + " moments");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != grads[i].size() ||
        params[i].size() != state.first_moment[i].size()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "adamw: parameter " + std::to_string(i) + " has " +
                      std::to_string(params[i].size()) + " values but grad has " +
                      std::to_string(grads[i].size()));
    }
  }
  const AdamWOptions& o = state.options;
  ++state.step;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  const T decay = static_cast<T>(1.0 - o.lr * o.weight_decay);
  const T b1 = static_cast<T>(o.beta1);
  const T b2 = static_cast<T>(o.beta2);
  const T step_size = static_cast<T>(o.lr / bc1);
  const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
  const T eps = static_cast<T>(o.eps);
  for (size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].mutable_data();
    const std::vector<T>& g = grads[i];
    std::vector<T>& m = state.first_moment[i];
    std::vector<T>& v = state.second_moment[i];
    for (size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      T denom = std::sqrt(v[j]) * inv_sqrt_bc2 + eps;
      p[j] = p[j] * decay - step_size * m[j] / denom;
    }
  }
}

template <typename T>
void AdamWStep(AdamWState<T>& state, std::span<Tensor<T>> params,
               const Gradients<T>& grads) {
  std::vector<std::vector<T>> dense;
  dense.reserve(params.size());
  for (const auto& p : params) {
    auto g = grads.Get(p);
    if (g.empty()) {
      dense.emplace_back(p.size(), T(0));
    } else {
      dense.emplace_back(g.begin(), g.end());
    }
  }
  AdamWStep<T>(state, params, dense);
}

template struct AdamWState<float>;
template struct AdamWState<double>;
template void AdamWStep(AdamWState<float>&, std::span<Tensor<float>>,
                        std::span<const std::vector<float>>);
template void AdamWStep(AdamWState<double>&, std::span<Tensor<double>>,
                        std::span<const std::vector<double>>);
template void AdamWStep(AdamWState<float>&, std::span<Tensor<float>>,
                        const Gradients<float>&);
template void AdamWStep(AdamWState<double>&, std::span<Tensor<double>>,
                        const Gradients<double>&);

}  // namespace pma
