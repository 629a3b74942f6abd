/*
 Copyright 2026 The MISO Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "miso/core/error.hpp"
#include "miso/optim/optimizers.hpp"

namespace miso {

LqrSolution riccati_lqr(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, const Matrix& Q_terminal,
                        int horizon, const State& x0) {
  if (horizon < 0) throw DimensionError("riccati_lqr: negative horizon");
  const auto m = B.cols();
  if (R.rows() != m || R.cols() != m) throw DimensionError("riccati_lqr: R must be m x m");
  if (Eigen::LLT<Matrix>(R).info() != Eigen::Success || !Eigen::FullPivLU<Matrix>(R).isInvertible())
    throw Error("riccati_lqr: R must be positive definite");
  std::vector<Matrix> gains(static_cast<std::size_t>(horizon));
  Matrix P = Q_terminal;
  for (int t = horizon - 1; t >= 0; --t) {
    const Matrix S = R + B.transpose() * P * B;
    Eigen::FullPivLU<Matrix> lu(S);
    if (!lu.isInvertible()) throw Error("riccati_lqr: R + B'PB is singular");
    const Matrix K = lu.solve(B.transpose() * P * A);
    gains[static_cast<std::size_t>(t)] = K;
    P = Q + A.transpose() * P * (A - B * K);
    P = 0.5 * (P + P.transpose()).eval();
  }
  LqrSolution out;
  out.controls = Matrix::Zero(horizon, m);
  State x = x0;
  double cost = 0.0;
  for (int t = 0; t < horizon; ++t) {
    const Vector u = -gains[static_cast<std::size_t>(t)] * x;
    out.controls.row(t) = u.transpose();
    cost += x.dot(Q * x) + u.dot(R * u);
    x = A * x + B * u;
  }
  cost += x.dot(Q_terminal * x);
  out.cost = cost;
  return out;
}

}  // namespace miso
