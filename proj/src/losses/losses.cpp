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

#include "miso/losses/losses.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "miso/core/error.hpp"

namespace miso {

std::string_view to_string(Phi phi) { return phi == Phi::tanh ? "tanh" : "clamp1"; }

Phi phi_from_string(std::string_view s) {
  if (s == "tanh") return Phi::tanh;
  if (s == "clamp1" || s == "min") return Phi::clamp1;
  throw ConfigError("unknown phi '" + std::string(s) + "'");
}

std::string_view to_string(Distance d) { return d == Distance::l2 ? "l2" : "l1"; }

Distance distance_from_string(std::string_view s) {
  if (s == "l2") return Distance::l2;
  if (s == "l1") return Distance::l1;
  throw ConfigError("unknown distance '" + std::string(s) + "'");
}

void LossConfig::validate() const {
  if (!(control_weight >= 0.0) || !(state_weight >= 0.0)) throw ConfigError("loss weights must be >= 0");
  if (!(alpha_k >= 0.0)) throw ConfigError("alpha_k must be >= 0");
  if (!(divergence_penalty >= 0.0)) throw ConfigError("divergence_penalty must be >= 0");
}

LossConfig default_loss_config(EnvId env, LossKind kind) {
  LossConfig c;
  c.kind = kind;
  switch (env) {
    case EnvId::toy1d: c.control_weight = 1.0; c.state_weight = 0.0; c.alpha_k = 0.1; break;
    case EnvId::reacher: c.control_weight = 100.0; c.state_weight = 0.0; c.alpha_k = 0.1; break;
    case EnvId::cartpole: c.control_weight = 1.0; c.state_weight = 0.01; c.alpha_k = 0.01; break;
    case EnvId::driving: c.control_weight = 5.0; c.state_weight = 0.005; c.alpha_k = 0.1; break;
  }
  if (kind == LossKind::regression || kind == LossKind::multi_output || kind == LossKind::wta) c.alpha_k = 0.0;
  return c;
}

double phi_value(Phi phi, double z) { return phi == Phi::tanh ? std::tanh(z) : std::min(z, 1.0); }

double phi_derivative(Phi phi, double z) {
  if (phi == Phi::tanh) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  }
  return z < 1.0 ? 1.0 : 0.0;
}

RegLoss reg_loss(const Environment& env, const ControlSequence& candidate, const DatasetRecord& record,
                 const LossConfig& cfg) {
  const Matrix& u = candidate.controls;
  const Matrix& target = record.oracle_controls.controls;
  if (u.rows() != target.rows() || u.cols() != target.cols())
    throw DimensionError("reg_loss: candidate and oracle shapes differ");
  const int H = static_cast<int>(u.rows());
  const double inv_h = 1.0 / H;

  RegLoss out;
  const Matrix du = u - target;
  out.control = du.squaredNorm() * inv_h;
  out.grad = (cfg.control_weight * 2.0 * inv_h) * du;

  if (cfg.state_weight > 0.0) {
    const Matrix& xs_target = record.oracle_states;
    const int n = env.state_dim();
    if (xs_target.rows() != H + 1 || xs_target.cols() != n)
      throw DimensionError("reg_loss: oracle_states shape mismatch");
    Matrix xs(H + 1, n);
    xs.row(0) = record.instance.x0.transpose();
    for (int t = 0; t < H && !out.diverged; ++t) {
      const State next = env.step(xs.row(t).transpose(), u.row(t).transpose());
      if (!next.allFinite()) out.diverged = true;
      xs.row(t + 1) = next.transpose();
    }
    if (!out.diverged) {
      const Matrix dx = xs.bottomRows(H) - xs_target.bottomRows(H);
      out.state = dx.squaredNorm() * inv_h;
      if (!std::isfinite(out.state)) out.diverged = true;
    }
    if (!out.diverged) {
      // adjoint sweep: lam = dL_state/dx_{t+1}
      Vector lam = 2.0 * inv_h * (xs.row(H) - xs_target.row(H)).transpose();
      for (int t = H - 1; t >= 0; --t) {
        const Linearization lin = env.jacobians(xs.row(t).transpose(), u.row(t).transpose());
        out.grad.row(t) += cfg.state_weight * (lin.B.transpose() * lam).transpose();
        if (t > 0) lam = 2.0 * inv_h * (xs.row(t) - xs_target.row(t)).transpose() + lin.A.transpose() * lam;
      }
    }
  }
  out.value = cfg.control_weight * out.control;
  if (out.diverged) {
    out.state = std::numeric_limits<double>::quiet_NaN();
    out.value += cfg.divergence_penalty;
  } else if (cfg.state_weight > 0.0) {
    out.value += cfg.state_weight * out.state;
  }
  return out;
}

PdTerm pd_term(const std::vector<ControlSequence>& candidates, const LossConfig& cfg,
               const std::vector<double>& weights) {
  const int K = static_cast<int>(candidates.size());
  PdTerm out;
  out.values.assign(K, 0.0);
  out.grads.reserve(K);
  for (const auto& c : candidates) out.grads.push_back(Matrix::Zero(c.controls.rows(), c.controls.cols()));
  if (K < 2) return out;
  if (!weights.empty() && static_cast<int>(weights.size()) != K)
    throw DimensionError("pd_term: weights size != K");
  const double inv = 1.0 / (K - 1);
  for (int i = 0; i < K; ++i) {
    for (int j = i + 1; j < K; ++j) {
      const Matrix diff = candidates[i].controls - candidates[j].controls;
      double d = 0.0;
      Matrix dd;  // d distance / d candidate_i
      if (cfg.distance == Distance::l2) {
        d = diff.norm();
        dd = d > 0.0 ? Matrix(diff / d) : Matrix(Matrix::Zero(diff.rows(), diff.cols()));
      } else {
        d = diff.cwiseAbs().sum();
        dd = diff.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
      }
      out.values[i] += d * inv;
      out.values[j] += d * inv;
      const double wi = weights.empty() ? 1.0 / K : weights[i];
      const double wj = weights.empty() ? 1.0 / K : weights[j];
      const double coef = (wi + wj) * inv;
      if (coef != 0.0) {
        out.grads[i] += coef * dd;
        out.grads[j] -= coef * dd;
      }
    }
  }
  return out;
}

namespace {

void check_candidates(const std::vector<ControlSequence>& candidates) {
  if (candidates.empty()) throw DimensionError("loss: empty candidate set");
}

std::vector<RegLoss> reg_losses(const Environment& env, const std::vector<ControlSequence>& candidates,
                                const DatasetRecord& record, const LossConfig& cfg, MultiLoss& out) {
  std::vector<RegLoss> regs;
  regs.reserve(candidates.size());
  for (const auto& c : candidates) {
    regs.push_back(reg_loss(env, c, record, cfg));
    out.reg_values.push_back(regs.back().value);
    if (regs.back().diverged) ++out.diverged;
  }
  return regs;
}

}  // namespace

MultiLoss multi_output_loss(const Environment& env, const std::vector<ControlSequence>& candidates,
                            const DatasetRecord& record, const LossConfig& cfg) {
  check_candidates(candidates);
  MultiLoss out;
  auto regs = reg_losses(env, candidates, record, cfg, out);
  const double K = static_cast<double>(candidates.size());
  double sum = 0.0;
  for (const auto& r : regs) sum += r.value;
  out.value = sum / K;
  for (auto& r : regs) out.grads.push_back(r.grad / K);
  return out;
}

MultiLoss pairwise_loss(const Environment& env, const std::vector<ControlSequence>& candidates,
                        const DatasetRecord& record, const LossConfig& cfg) {
  MultiLoss out = multi_output_loss(env, candidates, record, cfg);
  if (cfg.alpha_k == 0.0 || candidates.size() < 2) return out;
  const PdTerm pd = pd_term(candidates, cfg);
  out.pd_values = pd.values;
  double mean_pd = 0.0;
  for (double v : pd.values) mean_pd += v;
  mean_pd /= static_cast<double>(candidates.size());
  out.value -= cfg.alpha_k * mean_pd;
  for (std::size_t k = 0; k < candidates.size(); ++k) out.grads[k] -= cfg.alpha_k * pd.grads[k];
  return out;
}

MultiLoss wta_loss(const Environment& env, const std::vector<ControlSequence>& candidates,
                   const DatasetRecord& record, const LossConfig& cfg) {
  check_candidates(candidates);
  MultiLoss out;
  auto regs = reg_losses(env, candidates, record, cfg, out);
  int w = 0;
  for (int k = 1; k < static_cast<int>(regs.size()); ++k)
    if (regs[k].value < regs[w].value) w = k;
  out.winner = w;
  out.value = regs[w].value;
  for (int k = 0; k < static_cast<int>(regs.size()); ++k)
    out.grads.push_back(k == w ? regs[k].grad : Matrix(Matrix::Zero(regs[k].grad.rows(), regs[k].grad.cols())));
  return out;
}

MultiLoss mix_loss(const Environment& env, const std::vector<ControlSequence>& candidates,
                   const DatasetRecord& record, const LossConfig& cfg) {
  if (cfg.alpha_k == 0.0 || candidates.size() < 2) return wta_loss(env, candidates, record, cfg);
  MultiLoss out;
  auto regs = reg_losses(env, candidates, record, cfg, out);
  const int K = static_cast<int>(candidates.size());
  out.pd_values = pd_term(candidates, cfg, std::vector<double>(K, 0.0)).values;
  std::vector<double> score(K);
  for (int k = 0; k < K; ++k) score[k] = regs[k].value - cfg.alpha_k * phi_value(cfg.phi, out.pd_values[k]);
  int w = 0;
  for (int k = 1; k < K; ++k)
    if (score[k] < score[w]) w = k;
  out.winner = w;
  out.value = score[w];
  std::vector<double> weights(K, 0.0);
  weights[w] = -cfg.alpha_k * phi_derivative(cfg.phi, out.pd_values[w]);
  const PdTerm pd = pd_term(candidates, cfg, weights);
  for (int k = 0; k < K; ++k) {
    Matrix g = pd.grads[k];
    if (k == w) g += regs[k].grad;
    out.grads.push_back(std::move(g));
  }
  return out;
}

MultiLoss evaluate_loss(const Environment& env, const std::vector<ControlSequence>& candidates,
                        const DatasetRecord& record, const LossConfig& cfg) {
  switch (cfg.kind) {
    case LossKind::regression: {
      check_candidates(candidates);
      return multi_output_loss(env, {candidates.front()}, record, cfg);
    }
    case LossKind::multi_output: return multi_output_loss(env, candidates, record, cfg);
    case LossKind::pairwise: return pairwise_loss(env, candidates, record, cfg);
    case LossKind::wta: return wta_loss(env, candidates, record, cfg);
    case LossKind::mix: return mix_loss(env, candidates, record, cfg);
  }
  throw ConfigError("unknown loss kind");
}

}  // namespace miso
