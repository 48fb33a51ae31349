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

#ifndef PMA_TESTS_GRADCHECK_H_
#define PMA_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "pma/ops.h"
#include "pma/rng.h"
#include "pma/tensor.h"

namespace pma::testing {

using TensorD = Tensor<double>;

inline TensorD RandomLeaf(Shape shape, Rng& rng, double lo = -2.0,
                          double hi = 2.0) {
  std::vector<double> data(static_cast<size_t>(NumElements(shape)));
  for (double& v : data) v = lo + (hi - lo) * rng.Uniform();
  return TensorD::FromData(std::move(shape), std::move(data), true);
}

inline TensorD RandomConstant(Shape shape, Rng& rng) {
  std::vector<double> data(static_cast<size_t>(NumElements(shape)));
  for (double& v : data) v = rng.Uniform() * 2.0 - 1.0;
  return TensorD::FromData(std::move(shape), std::move(data), false);
}

// Contracts an arbitrary output with fixed random weights so every output
// element contributes to the scalar probe.
inline TensorD Probe(const TensorD& out, uint64_t seed = 99) {
  Rng rng(seed);
  return Sum(Mul(out, RandomConstant(out.shape(), rng)));
}

inline double RelativeError(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(1e-6, std::max(std::abs(analytic), std::abs(numeric)));
}

// Largest relative error between backward() and central differences over
// every element of every leaf.
inline double MaxGradError(const std::function<TensorD()>& loss_fn,
                           std::vector<TensorD> leaves, double h = 1e-5) {
  Gradients<double> grads = Backward(loss_fn());
  double worst = 0.0;
  for (TensorD& leaf : leaves) {
    Tensor<double> analytic = grads.AsTensor(leaf);
    auto values = leaf.mutable_data();
    for (size_t i = 0; i < values.size(); ++i) {
      double saved = values[i];
      double plus;
      double minus;
      {
        NoGradGuard guard;
        values[i] = saved + h;
        plus = loss_fn().item();
        values[i] = saved - h;
        minus = loss_fn().item();
      }
      values[i] = saved;
      double numeric = (plus - minus) / (2.0 * h);
      worst = std::max(worst, RelativeError(analytic.data()[i], numeric));
    }
  }
  return worst;
}

}  // namespace pma::testing

#endif  // PMA_TESTS_GRADCHECK_H_
