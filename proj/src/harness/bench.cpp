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

#include "miso/harness/bench.hpp"

#include <chrono>
#include <cmath>

#include "miso/core/error.hpp"
#include "miso/core/rng.hpp"
#include "miso/net/features.hpp"
#include "miso/net/model.hpp"

namespace miso {

namespace {

template <typename F>
std::pair<double, double> time_calls(int warmup, int reps, F&& f) {
  for (int i = 0; i < warmup; ++i) f();
  std::vector<double> ms(static_cast<std::size_t>(reps));
  for (auto& m : ms) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    m = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  double mean = 0.0;
  for (double m : ms) mean += m;
  mean /= reps;
  double var = 0.0;
  for (double m : ms) var += (m - mean) * (m - mean);
  return {mean, reps > 1 ? std::sqrt(var / (reps - 1)) : 0.0};
}

}  // namespace

std::vector<BenchRow> bench_inference(const Environment& env, const BenchConfig& cfg) {
  if (cfg.K.empty() || cfg.repetitions < 1 || cfg.warmup < 0) throw ConfigError("bench: empty K list or bad repetition count");
  Architecture arch;
  arch.feature_dim = feature_shape(env).size();
  arch.hidden = cfg.hidden;
  arch.embed = cfg.embed;
  arch.horizon = env.horizon();
  arch.control_dim = env.control_dim();
  const auto& p = env.params();

  Rng rng = make_rng(cfg.seed);
  std::normal_distribution<double> n01;
  Vector x(arch.feature_dim);
  for (auto& v : x) v = n01(rng);

  std::vector<BenchRow> rows;
  volatile double sink = 0.0;
  for (int K : cfg.K) {
    if (K < 1) throw ConfigError("bench: K must be >= 1");
    BenchRow r;
    r.K = K;
    arch.heads = K;
    const ModelParams multi = make_model(arch, env.id(), LossKind::wta, p.u_min, p.u_max, derive_seed(cfg.seed, K));
    arch.heads = 1;
    std::vector<ModelParams> members;
    for (int k = 0; k < K; ++k)
      members.push_back(make_model(arch, env.id(), LossKind::regression, p.u_min, p.u_max, derive_seed(cfg.seed, 1000 + k)));

    std::tie(r.multi_mean_ms, r.multi_std_ms) = time_calls(cfg.warmup, cfg.repetitions, [&] {
      const CandidateSet c = forward(multi, x);
      sink = sink + c.candidates.back().controls(0, 0);
    });
    std::tie(r.ensemble_mean_ms, r.ensemble_std_ms) = time_calls(cfg.warmup, cfg.repetitions, [&] {
      for (const auto& m : members) {
        const CandidateSet c = forward(m, x);
        sink = sink + c.candidates.back().controls(0, 0);
      }
    });
    rows.push_back(r);
  }
  return rows;
}

nlohmann::json to_json(const BenchRow& r) {
  return {{"K", r.K},
          {"multi_output_mean_ms", r.multi_mean_ms},
          {"multi_output_std_ms", r.multi_std_ms},
          {"ensemble_mean_ms", r.ensemble_mean_ms},
          {"ensemble_std_ms", r.ensemble_std_ms}};
}

}  // namespace miso
