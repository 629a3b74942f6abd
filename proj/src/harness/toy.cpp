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

#include "miso/harness/toy.hpp"

#include <cstdio>

#include "miso/core/rng.hpp"
#include "miso/core/rollout.hpp"
#include "miso/harness/data.hpp"
#include "miso/harness/train.hpp"
#include "miso/net/features.hpp"

namespace miso {

std::vector<ToyRow> toy_demo(const ToyDemoConfig& cfg, Exec exec) {
  const Environment env = Environment::make(EnvId::toy1d);
  GenDataConfig gc = default_gen_data_config(EnvId::toy1d);
  gc.episodes = cfg.records;
  gc.seed = cfg.seed;
  const GeneratedData data = gen_data(env, gc, exec);

  auto fit = [&](LossKind kind, int K, std::uint64_t slot) {
    TrainConfig tc = default_train_config(EnvId::toy1d, kind, K);
    tc.hidden = cfg.hidden;
    tc.embed = cfg.embed;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.adam.lr = cfg.lr;
    tc.seed = derive_seed(cfg.seed, slot);
    return train(env, data.records, tc, exec).best;
  };

  ProblemInstance psi = data.records.front().instance;
  psi.x0 = State::Zero(1);
  const ControlSequence zero = ControlSequence::zeros(env.horizon(), env.control_dim());
  const Vector f = featurize(env, psi, zero);

  std::vector<ToyRow> rows(4);
  rows[0].method = "ensemble";
  rows[0].models = {fit(LossKind::regression, 1, 1), fit(LossKind::regression, 1, 2)};
  rows[1].method = "miso_pd";
  rows[1].models = {fit(LossKind::pairwise, 2, 3)};
  rows[2].method = "miso_wta";
  rows[2].models = {fit(LossKind::wta, 2, 4)};
  rows[3].method = "miso_mix";
  rows[3].models = {fit(LossKind::mix, 2, 5)};

  for (auto& r : rows) {
    for (const auto& m : r.models)
      for (auto& c : forward(m, f).candidates) r.controls.push_back(c);
    for (const auto& c : r.controls) {
      const Trajectory tr = rollout(env, psi, c);
      r.final_states.push_back(tr.states(tr.states.rows() - 1, 0));
    }
  }
  return rows;
}

std::string format_toy_table(const std::vector<ToyRow>& rows) {
  std::string out = "method     u_0     u_1     u_2     u_3     u_4   | x_H\n";
  char buf[160];
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.controls.size(); ++i) {
      int n = std::snprintf(buf, sizeof buf, "%-9s", i == 0 ? r.method.c_str() : "");
      const Matrix& u = r.controls[i].controls;
      for (Eigen::Index t = 0; t < u.rows(); ++t) n += std::snprintf(buf + n, sizeof buf - n, " %7.3f", u(t, 0));
      std::snprintf(buf + n, sizeof buf - n, " | %6.3f\n", r.final_states[i]);
      out += buf;
    }
  }
  return out;
}

}  // namespace miso
