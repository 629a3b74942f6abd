#include <doctest.h>

#include <cmath>
#include <cstring>

#include "fd.hpp"
#include "miso/core/error.hpp"
#include "miso/core/rng.hpp"
#include "miso/core/rollout.hpp"
#include "miso/losses/losses.hpp"

using namespace miso;
using miso::testing::central_diff;
using miso::testing::rel_err;

namespace {

ControlSequence random_controls(const Environment& env, Rng& rng, double fraction) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix c(env.horizon(), env.control_dim());
  for (int t = 0; t < c.rows(); ++t)
    for (int j = 0; j < c.cols(); ++j) {
      const double mid = 0.5 * (env.u_min()[j] + env.u_max()[j]);
      const double half = 0.5 * (env.u_max()[j] - env.u_min()[j]);
      c(t, j) = mid + fraction * half * u(rng);
    }
  return ControlSequence(c);
}

DatasetRecord make_record(const Environment& env, Rng& rng, double fraction = 0.5) {
  DatasetRecord r;
  r.instance = env.sample_instance(rng);
  r.oracle_controls = random_controls(env, rng, fraction);
  r.warm_start = ControlSequence::zeros(env.horizon(), env.control_dim());
  const auto traj = rollout(env, r.instance, r.oracle_controls);
  r.oracle_states = traj.states;
  r.oracle_cost = traj.cost;
  return r;
}

std::vector<ControlSequence> random_set(const Environment& env, Rng& rng, int K, double fraction = 0.5) {
  std::vector<ControlSequence> out;
  for (int k = 0; k < K; ++k) out.push_back(random_controls(env, rng, fraction));
  return out;
}

// Stacks K candidates column-wise so the FD helper sees one matrix.
Matrix stack(const std::vector<ControlSequence>& c) {
  const auto H = c[0].controls.rows(), m = c[0].controls.cols();
  Matrix out(H, m * static_cast<Eigen::Index>(c.size()));
  for (std::size_t k = 0; k < c.size(); ++k) out.middleCols(static_cast<Eigen::Index>(k) * m, m) = c[k].controls;
  return out;
}

std::vector<ControlSequence> unstack(const Matrix& s, int K) {
  const auto m = s.cols() / K;
  std::vector<ControlSequence> out;
  for (int k = 0; k < K; ++k) out.emplace_back(Matrix(s.middleCols(k * m, m)));
  return out;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

bool same_bits(const Matrix& a, const Matrix& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

ControlSequence scalar_seq(std::initializer_list<double> v) {
  Matrix u(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) u(i++, 0) = x;
  return ControlSequence(u);
}

}  // namespace

TEST_CASE("regression loss vanishes at the oracle") {
  for (EnvId id : {EnvId::cartpole, EnvId::driving, EnvId::reacher}) {
    const auto env = Environment::make(id);
    Rng rng = make_rng(1);
    const auto rec = make_record(env, rng);
    LossConfig cfg = default_loss_config(id, LossKind::regression);
    cfg.state_weight = 1.0;
    const auto r = reg_loss(env, rec.oracle_controls, rec, cfg);
    CHECK(r.value == 0.0);
    CHECK(r.grad.isZero(0.0));
  }
}

TEST_CASE("toy control loss example") {
  const auto env = Environment::make(EnvId::toy1d);
  DatasetRecord rec;
  rec.instance.env_id = EnvId::toy1d;
  rec.instance.x0 = State::Zero(1);
  rec.instance.goal = State::Zero(1);
  rec.oracle_controls = scalar_seq({1, 1, 0, 0, 0});
  rec.oracle_states = Matrix::Zero(6, 1);
  LossConfig cfg;
  cfg.control_weight = 1.0;
  cfg.state_weight = 0.0;
  const auto r = reg_loss(env, ControlSequence::zeros(5, 1), rec, cfg);
  CHECK(r.value == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("regression gradient including the state adjoint matches finite differences") {
  for (EnvId id : {EnvId::cartpole, EnvId::driving}) {
    const auto env = Environment::make(id);
    Rng rng = make_rng(20 + static_cast<int>(id));
    LossConfig cfg = default_loss_config(id, LossKind::regression);
    cfg.state_weight = 1.0;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const auto rec = make_record(env, rng, 0.15);
      const auto cand = random_controls(env, rng, 0.15);
      const auto r = reg_loss(env, cand, rec, cfg);
      REQUIRE(!r.diverged);
      const Matrix fd = central_diff(
          [&](const Matrix& u) { return reg_loss(env, ControlSequence(u), rec, cfg).value; }, cand.controls);
      worst = std::max(worst, rel_err(r.grad, fd, 1e-3));
    }
    INFO("env " << to_string(id));
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("divergent rollouts add the penalty") {
  const auto env = Environment::make(EnvId::cartpole);
  Rng rng = make_rng(3);
  auto rec = make_record(env, rng);
  rec.instance.x0[3] = 1e300;
  LossConfig cfg = default_loss_config(EnvId::cartpole, LossKind::regression);
  cfg.divergence_penalty = 123.0;
  const auto cand = random_controls(env, rng, 0.5);
  const auto r = reg_loss(env, cand, rec, cfg);
  CHECK(r.diverged);
  CHECK(r.value == doctest::Approx(cfg.control_weight * r.control + 123.0));
}

TEST_CASE("pairwise distance examples") {
  LossConfig cfg;
  const std::vector<ControlSequence> same = {scalar_seq({1, 2}), scalar_seq({1, 2})};
  for (double v : pd_term(same, cfg).values) CHECK(v == 0.0);

  const Matrix base = Matrix::Random(4, 2);
  Matrix shift(4, 2);
  shift.setConstant(0.5);  // L2 norm of the shift is 0.5 * sqrt(8)
  const auto two = pd_term({ControlSequence(base), ControlSequence(Matrix(base + shift))}, cfg);
  CHECK(two.values[0] == doctest::Approx(0.5 * std::sqrt(8.0)));
  CHECK(two.values[1] == doctest::Approx(0.5 * std::sqrt(8.0)));

  const auto three = pd_term({scalar_seq({0}), scalar_seq({1}), scalar_seq({2})}, cfg);
  CHECK(three.values[0] == doctest::Approx(1.5));
  CHECK(three.values[1] == doctest::Approx(1.0));
  CHECK(three.values[2] == doctest::Approx(1.5));

  CHECK(pd_term({scalar_seq({4})}, cfg).values[0] == 0.0);

  LossConfig l1;
  l1.distance = Distance::l1;
  const auto manhattan = pd_term({scalar_seq({0, 0}), scalar_seq({1, -2})}, l1);
  CHECK(manhattan.values[0] == doctest::Approx(3.0));
}

TEST_CASE("mean dispersion is permutation invariant and matches the pair mean") {
  const auto env = Environment::make(EnvId::driving);
  Rng rng = make_rng(4);
  LossConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    auto set = random_set(env, rng, 5);
    const auto a = pd_term(set, cfg);
    double mean_k = 0.0;
    for (double v : a.values) mean_k += v / 5.0;
    double pairs = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j) pairs += (set[i].controls - set[j].controls).norm();
    CHECK(mean_k == doctest::Approx(pairs / 10.0).epsilon(1e-12));
    std::swap(set[0], set[3]);
    std::swap(set[1], set[4]);
    const auto b = pd_term(set, cfg);
    double mean_b = 0.0;
    for (double v : b.values) mean_b += v / 5.0;
    CHECK(mean_b == doctest::Approx(mean_k).epsilon(1e-12));
  }
}

TEST_CASE("alpha zero reproduces the base losses bit for bit") {
  for (EnvId id : {EnvId::toy1d, EnvId::cartpole, EnvId::reacher, EnvId::driving}) {
    const auto env = Environment::make(id);
    Rng rng = make_rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const auto rec = make_record(env, rng);
      const auto set = random_set(env, rng, 4);
      LossConfig cfg = default_loss_config(id, LossKind::pairwise);
      cfg.alpha_k = 0.0;
      const auto mean = multi_output_loss(env, set, rec, cfg);
      const auto pw = pairwise_loss(env, set, rec, cfg);
      CHECK(same_bits(mean.value, pw.value));
      const auto wta = wta_loss(env, set, rec, cfg);
      const auto mix = mix_loss(env, set, rec, cfg);
      CHECK(same_bits(wta.value, mix.value));
      CHECK(wta.winner == mix.winner);
      for (int k = 0; k < 4; ++k) {
        CHECK(same_bits(mean.grads[k], pw.grads[k]));
        CHECK(same_bits(wta.grads[k], mix.grads[k]));
      }
    }
  }
}

TEST_CASE("more spread lowers the pairwise loss at fixed regression values") {
  const auto env = Environment::make(EnvId::toy1d);
  Rng rng = make_rng(6);
  const auto rec = make_record(env, rng);
  LossConfig cfg;
  cfg.kind = LossKind::pairwise;
  cfg.control_weight = 0.0;
  cfg.alpha_k = 0.1;
  const auto narrow = pairwise_loss(env, {scalar_seq({0.1, 0, 0, 0, 0}), scalar_seq({-0.1, 0, 0, 0, 0})}, rec, cfg);
  const auto wide = pairwise_loss(env, {scalar_seq({0.5, 0, 0, 0, 0}), scalar_seq({-0.5, 0, 0, 0, 0})}, rec, cfg);
  CHECK(wide.value < narrow.value);
  const auto same = pairwise_loss(env, {scalar_seq({0.3, 0, 0, 0, 0}), scalar_seq({0.3, 0, 0, 0, 0})}, rec, cfg);
  CHECK(same.value == 0.0);
}

TEST_CASE("winner takes all picks the minimum and only trains the winner") {
  const auto env = Environment::make(EnvId::toy1d);
  DatasetRecord rec;
  rec.instance.env_id = EnvId::toy1d;
  rec.instance.x0 = State::Zero(1);
  rec.instance.goal = State::Zero(1);
  rec.oracle_controls = ControlSequence::zeros(5, 1);
  rec.oracle_states = Matrix::Zero(6, 1);
  LossConfig cfg;
  // Constant sequences c give L_control = c^2.
  const std::vector<ControlSequence> set = {ControlSequence(Matrix::Constant(5, 1, std::sqrt(3.0))),
                                            ControlSequence(Matrix::Constant(5, 1, std::sqrt(1.2))),
                                            ControlSequence(Matrix::Constant(5, 1, std::sqrt(2.5)))};
  const auto w = wta_loss(env, set, rec, cfg);
  CHECK(w.winner == 1);
  CHECK(w.value == doctest::Approx(1.2).epsilon(1e-12));
  const auto r1 = reg_loss(env, set[1], rec, cfg);
  CHECK(same_bits(w.grads[1], r1.grad));
  CHECK(w.grads[0].isZero(0.0));
  CHECK(w.grads[2].isZero(0.0));

  const auto single = wta_loss(env, {set[2]}, rec, cfg);
  CHECK(same_bits(single.value, reg_loss(env, set[2], rec, cfg).value));

  const auto tie = wta_loss(env, {set[1], set[1]}, rec, cfg);
  CHECK(tie.winner == 0);
}

TEST_CASE("mix dispersion is bounded and vanishes for identical candidates") {
  const auto env = Environment::make(EnvId::reacher);
  Rng rng = make_rng(7);
  const auto rec = make_record(env, rng);
  for (Phi phi : {Phi::tanh, Phi::clamp1}) {
    LossConfig cfg = default_loss_config(EnvId::reacher, LossKind::mix);
    cfg.phi = phi;
    cfg.alpha_k = 0.3;
    for (int trial = 0; trial < 50; ++trial) {
      const auto set = random_set(env, rng, 3, 1.0);
      const auto mx = mix_loss(env, set, rec, cfg);
      const double reg = mx.reg_values[static_cast<std::size_t>(mx.winner)];
      CHECK(std::abs(mx.value - reg) <= cfg.alpha_k);
    }
    const auto c = random_controls(env, rng, 0.5);
    const auto mx = mix_loss(env, {c, c}, rec, cfg);
    CHECK(mx.value == mx.reg_values[0]);
  }
  CHECK(phi_value(Phi::tanh, 0.0) == 0.0);
  CHECK(phi_value(Phi::clamp1, 7.0) == 1.0);
}

TEST_CASE("wta never exceeds the mean loss") {
  const auto env = Environment::make(EnvId::cartpole);
  Rng rng = make_rng(8);
  LossConfig cfg = default_loss_config(EnvId::cartpole, LossKind::wta);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto rec = make_record(env, rng);
    const int K = 1 + static_cast<int>(rng() % 8);
    const auto set = random_set(env, rng, K, 1.0);
    CHECK(wta_loss(env, set, rec, cfg).value <= multi_output_loss(env, set, rec, cfg).value);
  }
}

TEST_CASE("multi-candidate loss gradients match finite differences") {
  const auto env = Environment::make(EnvId::cartpole);
  Rng rng = make_rng(9);
  const int K = 3;
  for (LossKind kind : {LossKind::multi_output, LossKind::pairwise, LossKind::wta, LossKind::mix}) {
    for (Distance dist : {Distance::l2, Distance::l1}) {
      LossConfig cfg = default_loss_config(EnvId::cartpole, kind);
      cfg.state_weight = 0.5;
      cfg.distance = dist;
      if (kind == LossKind::pairwise || kind == LossKind::mix) cfg.alpha_k = 0.2;
      double worst = 0.0;
      for (int trial = 0; trial < 20; ++trial) {
        const auto rec = make_record(env, rng, 0.15);
        const auto set = random_set(env, rng, K, 0.15);
        const auto res = evaluate_loss(env, set, rec, cfg);
        const Matrix fd = central_diff(
            [&](const Matrix& s) { return evaluate_loss(env, unstack(s, K), rec, cfg).value; }, stack(set));
        Matrix g(env.horizon(), K);
        for (int k = 0; k < K; ++k) g.col(k) = res.grads[k].col(0);
        worst = std::max(worst, rel_err(g, fd, 1e-3));
      }
      INFO("kind " << to_string(kind) << " distance " << to_string(dist));
      CHECK(worst <= 1e-4);
    }
  }
}

TEST_CASE("loss config validation") {
  LossConfig c;
  c.alpha_k = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = LossConfig{};
  c.state_weight = -0.1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(default_loss_config(EnvId::reacher, LossKind::pairwise).control_weight == 100.0);
  CHECK(default_loss_config(EnvId::cartpole, LossKind::pairwise).alpha_k == 0.01);
  CHECK(default_loss_config(EnvId::driving, LossKind::pairwise).state_weight == 0.005);
  CHECK(phi_from_string("tanh") == Phi::tanh);
  CHECK_THROWS_AS(phi_from_string("relu"), ConfigError);
}
