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

#include "miso/harness/train.hpp"

#include <cmath>
#include <numeric>

#include "miso/core/error.hpp"
#include "miso/core/rng.hpp"
#include "miso/net/features.hpp"
#include "miso/net/standardizer.hpp"

namespace miso {

void TrainConfig::validate() const {
  loss.validate();
  if (K < 1) throw ConfigError("train: K must be >= 1");
  if (loss.kind == LossKind::regression && K != 1) throw ConfigError("train: regression requires K = 1");
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (embed < 1) throw ConfigError("train: embed must be >= 1");
  for (int h : hidden)
    if (h < 1) throw ConfigError("train: hidden widths must be >= 1");
  if (!(adam.lr > 0.0) || adam.weight_decay < 0.0 || !(adam.grad_norm_clip > 0.0))
    throw ConfigError("train: invalid optimizer settings");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ConfigError("train: val_fraction must be in [0, 1)");
}

TrainConfig default_train_config(EnvId env, LossKind kind, int K) {
  TrainConfig c;
  c.loss = default_loss_config(env, kind);
  c.K = kind == LossKind::regression ? 1 : K;
  switch (env) {
    case EnvId::reacher: c.adam.lr = 1e-3; break;
    case EnvId::cartpole: c.adam.lr = 3e-4; break;
    case EnvId::driving: c.adam.lr = 1e-4; break;
    case EnvId::toy1d: c.adam.lr = 3e-4; break;
  }
  c.adam.weight_decay = 1e-4;
  c.adam.grad_norm_clip = 2.0;
  return c;
}

TrainConfig train_config_from_json(const nlohmann::json& j, EnvId env) {
  const LossKind kind = loss_kind_from_string(j.value("loss", std::string("regression")));
  TrainConfig c = default_train_config(env, kind, j.value("K", 1));
  try {
    if (j.contains("control_weight")) c.loss.control_weight = j.at("control_weight").get<double>();
    if (j.contains("state_weight")) c.loss.state_weight = j.at("state_weight").get<double>();
    if (j.contains("alpha")) c.loss.alpha_k = j.at("alpha").get<double>();
    if (j.contains("phi")) c.loss.phi = phi_from_string(j.at("phi").get<std::string>());
    if (j.contains("distance")) c.loss.distance = distance_from_string(j.at("distance").get<std::string>());
    if (j.contains("divergence_penalty")) c.loss.divergence_penalty = j.at("divergence_penalty").get<double>();
    if (j.contains("hidden")) c.hidden = j.at("hidden").get<std::vector<int>>();
    c.embed = j.value("embed", c.embed);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.adam.lr = j.value("lr", c.adam.lr);
    c.adam.weight_decay = j.value("weight_decay", c.adam.weight_decay);
    c.adam.grad_norm_clip = j.value("grad_norm_clip", c.adam.grad_norm_clip);
    c.seed = j.value("seed", c.seed);
    c.val_fraction = j.value("val_fraction", c.val_fraction);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"loss", std::string(to_string(c.loss.kind))},
          {"K", c.K},
          {"control_weight", c.loss.control_weight},
          {"state_weight", c.loss.state_weight},
          {"alpha", c.loss.alpha_k},
          {"phi", std::string(to_string(c.loss.phi))},
          {"distance", std::string(to_string(c.loss.distance))},
          {"divergence_penalty", c.loss.divergence_penalty},
          {"hidden", c.hidden},
          {"embed", c.embed},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr", c.adam.lr},
          {"weight_decay", c.adam.weight_decay},
          {"grad_norm_clip", c.adam.grad_norm_clip},
          {"seed", c.seed},
          {"val_fraction", c.val_fraction}};
}

nlohmann::json to_json(const EpochLog& e) {
  return {{"epoch", e.epoch},
          {"train_loss", e.train_loss},
          {"val_loss", e.val_loss},
          {"winner_frequency", e.winner_frequency}};
}

bool in_validation(std::uint32_t instance_id, double val_fraction) {
  const std::uint64_t h = derive_seed(0x5b117ULL, instance_id);
  return static_cast<double>(h % 1000000) < val_fraction * 1e6;
}

namespace {

struct BatchResult {
  double loss = 0.0;
  std::vector<int> winners;
};

// Loss over the columns `idx` of `features`; fills `upstream` (scaled by 1/B) when given.
BatchResult batch_loss(const Environment& env, const ModelParams& model, const Matrix& features,
                       const std::vector<const DatasetRecord*>& records, const std::vector<std::size_t>& idx,
                       const LossConfig& loss, Exec exec, ForwardCache* cache, std::vector<Matrix>* upstream) {
  const auto B = static_cast<Eigen::Index>(idx.size());
  Matrix f(features.rows(), B);
  for (Eigen::Index i = 0; i < B; ++i) f.col(i) = features.col(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]));
  const auto out = forward_batch(model, f, cache);
  const int K = model.K(), H = model.horizon, m = model.control_dim;
  if (upstream) upstream->assign(static_cast<std::size_t>(K), Matrix::Zero(model.output_dim(), B));
  std::vector<double> values(static_cast<std::size_t>(B));
  BatchResult r;
  r.winners.assign(static_cast<std::size_t>(B), -1);
  for_each_index(exec, static_cast<std::size_t>(B), [&](std::size_t i) {
    std::vector<ControlSequence> cands;
    cands.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
      cands.push_back(unflatten(out[static_cast<std::size_t>(k)].col(static_cast<Eigen::Index>(i)), H, m));
    const MultiLoss l = evaluate_loss(env, cands, *records[idx[i]], loss);
    values[i] = l.value;
    r.winners[i] = l.winner;
    if (upstream)
      for (int k = 0; k < K; ++k)
        (*upstream)[static_cast<std::size_t>(k)].col(static_cast<Eigen::Index>(i)) =
            flatten(ControlSequence(l.grads[static_cast<std::size_t>(k)])) / static_cast<double>(B);
  });
  for (double v : values) r.loss += v;
  r.loss /= static_cast<double>(B);
  return r;
}

double evaluate(const Environment& env, const ModelParams& model, const Matrix& features,
                const std::vector<const DatasetRecord*>& records, const std::vector<std::size_t>& set,
                const LossConfig& loss, int batch, Exec exec, std::vector<double>* winner_freq) {
  double total = 0.0;
  if (winner_freq) winner_freq->assign(static_cast<std::size_t>(model.K()), 0.0);
  for (std::size_t start = 0; start < set.size(); start += static_cast<std::size_t>(batch)) {
    const std::vector<std::size_t> idx(set.begin() + static_cast<std::ptrdiff_t>(start),
                                       set.begin() + static_cast<std::ptrdiff_t>(std::min(set.size(), start + static_cast<std::size_t>(batch))));
    const BatchResult r = batch_loss(env, model, features, records, idx, loss, exec, nullptr, nullptr);
    total += r.loss * static_cast<double>(idx.size());
    if (winner_freq)
      for (int w : r.winners) (*winner_freq)[static_cast<std::size_t>(std::max(w, 0))] += 1.0 / static_cast<double>(set.size());
  }
  return total / static_cast<double>(set.size());
}

}  // namespace

TrainResult train(const Environment& env, const std::vector<DatasetRecord>& records, const TrainConfig& cfg_in,
                  Exec exec) {
  TrainConfig cfg = cfg_in;
  if (cfg.loss.kind == LossKind::regression) cfg.K = 1;
  cfg.validate();
  if (records.empty()) throw Error("train: empty dataset");

  const FeatureShape shape = feature_shape(env);
  std::vector<const DatasetRecord*> usable;
  std::vector<Vector> feats;
  for (const auto& r : records) {
    if (r.instance.env_id != env.id()) throw EnvMismatchError("train: record environment does not match");
    try {
      feats.push_back(featurize(env, r.instance, r.warm_start));
      usable.push_back(&r);
    } catch (const DivergenceError&) {
    }
  }
  if (usable.empty()) throw Error("train: no record has a finite warm-start rollout");
  Matrix features(shape.size(), static_cast<Eigen::Index>(usable.size()));
  for (std::size_t i = 0; i < usable.size(); ++i) features.col(static_cast<Eigen::Index>(i)) = feats[i];

  std::vector<std::size_t> train_idx, val_idx;
  for (std::size_t i = 0; i < usable.size(); ++i)
    (in_validation(usable[i]->instance.instance_id, cfg.val_fraction) ? val_idx : train_idx).push_back(i);
  if (train_idx.empty()) throw Error("train: training split is empty");
  if (val_idx.empty()) val_idx = train_idx;

  Architecture arch;
  arch.feature_dim = shape.size();
  arch.hidden = cfg.hidden;
  arch.embed = cfg.embed;
  arch.heads = cfg.K;
  arch.horizon = env.horizon();
  arch.control_dim = env.control_dim();
  ModelParams model = make_model(arch, env.id(), cfg.loss.kind, env.u_min(), env.u_max(), derive_seed(cfg.seed, 1));

  Matrix train_in(features.rows(), static_cast<Eigen::Index>(train_idx.size()));
  Matrix train_out(model.output_dim(), static_cast<Eigen::Index>(train_idx.size()));
  for (std::size_t i = 0; i < train_idx.size(); ++i) {
    train_in.col(static_cast<Eigen::Index>(i)) = features.col(static_cast<Eigen::Index>(train_idx[i]));
    train_out.col(static_cast<Eigen::Index>(i)) = flatten(usable[train_idx[i]]->oracle_controls);
  }
  const Standardizer sin = Standardizer::fit(train_in);
  const Standardizer sout = Standardizer::fit(train_out);
  model.in_mean = sin.mean;
  model.in_std = sin.std;
  model.out_mean = sout.mean;
  model.out_std = sout.std;
  model.validate();

  TrainResult res;
  res.train_count = train_idx.size();
  res.val_count = val_idx.size();
  const int eval_batch = std::max(cfg.batch_size, 256);
  auto log_epoch = [&](int epoch, double train_loss) {
    EpochLog e;
    e.epoch = epoch;
    e.train_loss = train_loss;
    e.val_loss = evaluate(env, model, features, usable, val_idx, cfg.loss, eval_batch, exec, &e.winner_frequency);
    if (!std::isfinite(e.val_loss))
      throw Error("train: non-finite validation loss at epoch " + std::to_string(epoch));
    res.log.push_back(e);
    if (res.log.size() == 1 || e.val_loss < res.log[static_cast<std::size_t>(res.best_epoch)].val_loss) {
      res.best_epoch = epoch;
      res.best = model;
    }
  };
  log_epoch(0, evaluate(env, model, features, usable, train_idx, cfg.loss, eval_batch, exec, nullptr));

  AdamWState state;
  std::vector<std::size_t> order = train_idx;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng = make_rng(derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
      ForwardCache cache;
      std::vector<Matrix> upstream;
      const BatchResult r = batch_loss(env, model, features, usable, idx, cfg.loss, exec, &cache, &upstream);
      if (!std::isfinite(r.loss))
        throw Error("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                    std::to_string(start));
      sum += r.loss * static_cast<double>(idx.size());
      const Vector grad = backward(model, cache, upstream);
      adamw_step(model.theta, grad, state, cfg.adam);
      if (!model.theta.allFinite()) throw Error("train: parameters became non-finite at epoch " + std::to_string(epoch));
    }
    log_epoch(epoch, sum / static_cast<double>(order.size()));
  }
  return res;
}

}  // namespace miso
