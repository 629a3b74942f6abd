#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "fd.hpp"
#include "miso/core/error.hpp"
#include "miso/core/rng.hpp"
#include "miso/net/adamw.hpp"
#include "miso/net/checkpoint.hpp"
#include "miso/net/features.hpp"
#include "miso/net/model.hpp"
#include "miso/net/standardizer.hpp"
#include "miso/parallel/exec.hpp"

using namespace miso;
using miso::testing::central_diff;
using miso::testing::rel_err;

namespace {

constexpr EnvId kAll[] = {EnvId::toy1d, EnvId::cartpole, EnvId::reacher, EnvId::driving};

ModelParams small_model(const Environment& env, int K, std::uint64_t seed, double bound = 1e9) {
  Architecture a;
  a.feature_dim = feature_shape(env).size();
  a.hidden = {16, 12};
  a.embed = 8;
  a.heads = K;
  a.horizon = env.horizon();
  a.control_dim = env.control_dim();
  auto p = make_model(a, env.id(), LossKind::wta, Vector::Constant(a.control_dim, -bound),
                      Vector::Constant(a.control_dim, bound), seed);
  Rng rng = make_rng(seed + 1);
  std::uniform_real_distribution<double> u(0.5, 2.0), c(-1.0, 1.0);
  for (auto* v : {&p.in_std, &p.out_std, &p.out_scale}) v->noalias() = v->unaryExpr([&](double) { return u(rng); });
  for (auto* v : {&p.in_mean, &p.out_mean}) v->noalias() = v->unaryExpr([&](double) { return c(rng); });
  for (const auto& h : p.heads) p.theta.segment(h.b_offset, h.out).setRandom();
  return p;
}

Matrix random_features(int dim, int batch, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.5);
  return Matrix::NullaryExpr(dim, batch, [&] { return n(rng); });
}

}  // namespace

TEST_CASE("feature shapes follow the per-environment layout") {
  CHECK(feature_shape(Environment::make(EnvId::toy1d)).src_len == 5);
  CHECK(feature_shape(Environment::make(EnvId::toy1d)).src_dim == 2);
  CHECK(feature_shape(Environment::make(EnvId::cartpole)).src_len == 9);
  CHECK(feature_shape(Environment::make(EnvId::cartpole)).src_dim == 5);
  CHECK(feature_shape(Environment::make(EnvId::reacher)).src_len == 10);
  CHECK(feature_shape(Environment::make(EnvId::reacher)).src_dim == 8);
  CHECK(feature_shape(Environment::make(EnvId::driving)).src_len == 40);
  CHECK(feature_shape(Environment::make(EnvId::driving)).src_dim == 7);
  for (EnvId id : kAll) {
    const auto env = Environment::make(id);
    Rng rng = make_rng(2);
    const auto psi = env.sample_instance(rng);
    const Vector f = featurize(env, psi, ControlSequence::zeros(env.horizon(), env.control_dim()));
    CHECK(f.size() == feature_shape(env).size());
    CHECK(f.allFinite());
  }
}

TEST_CASE("warm start resting at the goal has a zero error block") {
  const auto env = Environment::make(EnvId::cartpole);
  ProblemInstance psi;
  psi.env_id = EnvId::cartpole;
  psi.x0 = State::Zero(4);
  psi.x0[0] = 0.7;
  psi.goal = psi.x0;
  const Vector f = featurize(env, psi, ControlSequence::zeros(env.horizon(), 1));
  CHECK(f.isZero(0.0));
}

TEST_CASE("zero parameters produce zero controls") {
  const auto env = Environment::make(EnvId::cartpole);
  auto p = small_model(env, 3, 1, 5.5);
  p.theta.setZero();
  p.out_mean.setZero();
  Rng rng = make_rng(3);
  for (const auto& c : forward(p, random_features(p.feature_dim, 1, rng).col(0)).candidates)
    CHECK(c.controls.isZero(0.0));
}

TEST_CASE("outputs always respect the control bounds") {
  const auto env = Environment::make(EnvId::driving);
  auto p = small_model(env, 4, 2, 1.0);
  p.out_scale *= 50.0;
  Rng rng = make_rng(4);
  const auto outs = forward_batch(p, random_features(p.feature_dim, 64, rng));
  for (const auto& y : outs)
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      CHECK(y.row(r).maxCoeff() <= 1.0);
      CHECK(y.row(r).minCoeff() >= -1.0);
    }
}

TEST_CASE("single-output model reduces to one candidate") {
  const auto env = Environment::make(EnvId::toy1d);
  const auto p = small_model(env, 1, 9);
  Rng rng = make_rng(9);
  CHECK(forward(p, random_features(p.feature_dim, 1, rng).col(0)).size() == 1);
}

TEST_CASE("linear head gradient has the closed form") {
  const auto env = Environment::make(EnvId::toy1d);
  auto p = small_model(env, 1, 5);
  p.out_scale.setOnes();
  p.out_std.setOnes();
  p.out_mean.setZero();
  Rng rng = make_rng(5);
  const Matrix x = random_features(p.feature_dim, 1, rng);
  const Vector y = Vector::Random(p.output_dim());
  ForwardCache cache;
  const auto out = forward_batch(p, x, &cache);
  const Matrix residual = out[0].col(0) - y;
  const Vector grad = backward(p, cache, {Matrix(2.0 * residual)});
  const auto& h = p.heads[0];
  const Matrix z = cache.post.back();
  const Matrix want_w = 2.0 * residual * z.transpose();
  const Matrix got_w = Eigen::Map<const Matrix>(grad.data() + h.w_offset, h.out, h.in);
  CHECK((got_w - want_w).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((grad.segment(h.b_offset, h.out) - 2.0 * residual).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("backward matches central differences") {
  for (EnvId id : kAll) {
    const auto env = Environment::make(id);
    Rng rng = make_rng(77 + static_cast<int>(id));
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      auto p = small_model(env, 3, 100 + trial);
      REQUIRE(p.num_parameters() <= 10000);
      const Matrix x = random_features(p.feature_dim, 3, rng);
      std::vector<Matrix> dir;
      for (int k = 0; k < p.K(); ++k) dir.push_back(Matrix::Random(p.output_dim(), 3));
      auto loss = [&](const Matrix& theta) {
        ModelParams q = p;
        q.theta = theta.col(0);
        const auto out = forward_batch(q, x);
        double s = 0.0;
        for (int k = 0; k < q.K(); ++k) s += out[k].cwiseProduct(dir[k]).sum();
        return s;
      };
      ForwardCache cache;
      forward_batch(p, x, &cache);
      const Vector g = backward(p, cache, dir);
      const Matrix fd = central_diff(loss, Matrix(p.theta), 1e-6);
      // floor 1e-3 turns the 1e-4 relative bound into a 1e-7 absolute one near zero
      worst = std::max(worst, rel_err(g, fd, 1e-3));
    }
    INFO("env " << to_string(id));
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("clamped outputs pass no gradient outward") {
  const auto env = Environment::make(EnvId::toy1d);
  auto p = small_model(env, 1, 6, 1.0);
  const Eigen::Index last = p.heads[0].b_offset;
  p.theta.segment(last, p.heads[0].out).setConstant(100.0);  // push every output past u_max
  Rng rng = make_rng(6);
  const Matrix x = random_features(p.feature_dim, 1, rng);
  ForwardCache cache;
  const auto out = forward_batch(p, x, &cache);
  CHECK((out[0].array() == 1.0).all());
  const Vector g = backward(p, cache, {Matrix(Matrix::Constant(p.output_dim(), 1, -1.0))});
  CHECK(g.isZero(0.0));
}

TEST_CASE("backward needs a forward cache") {
  const auto env = Environment::make(EnvId::toy1d);
  const auto p = small_model(env, 1, 7);
  CHECK_THROWS_AS(backward(p, ForwardCache{}, {Matrix::Zero(p.output_dim(), 1)}), Error);
}

TEST_CASE("truncated heads reproduce the leading outputs") {
  const auto env = Environment::make(EnvId::cartpole);
  const auto p = small_model(env, 8, 11);
  const auto q = truncate_heads(p, 3);
  CHECK(q.K() == 3);
  Rng rng = make_rng(11);
  const Matrix x = random_features(p.feature_dim, 5, rng);
  const auto a = forward_batch(p, x);
  const auto b = forward_batch(q, x);
  for (int k = 0; k < 3; ++k) CHECK(a[k] == b[k]);
  CHECK_THROWS(truncate_heads(p, 9));
}

TEST_CASE("concurrent forward calls match serial calls") {
  const auto env = Environment::make(EnvId::reacher);
  const auto p = small_model(env, 4, 12);
  Rng rng = make_rng(12);
  const Matrix x = random_features(p.feature_dim, 64, rng);
  std::vector<std::vector<Matrix>> serial(64), parallel(64);
  for_each_index(Exec::serial, 64, [&](std::size_t i) { serial[i] = forward_batch(p, x.col(i)); });
  for_each_index(Exec::parallel, 64, [&](std::size_t i) { parallel[i] = forward_batch(p, x.col(i)); });
  for (int i = 0; i < 64; ++i)
    for (int k = 0; k < 4; ++k) CHECK(serial[i][k] == parallel[i][k]);
}

TEST_CASE("adamw clipping and decay") {
  Vector g(4);
  g << 2.0, 2.0, 2.0, 2.0;  // norm 4
  Vector clipped = g;
  CHECK(clip_grad_norm(clipped, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK((clipped - 0.5 * g).cwiseAbs().maxCoeff() <= 1e-15);

  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  Vector theta = Vector::LinSpaced(5, -1.0, 1.0);
  const Vector before = theta;
  AdamWState st;
  adamw_step(theta, Vector::Zero(5), st, cfg);
  CHECK(theta == before);

  cfg.weight_decay = 0.1;
  cfg.lr = 0.01;
  AdamWState st2;
  adamw_step(theta, Vector::Zero(5), st2, cfg);
  CHECK((theta - before * (1.0 - 0.01 * 0.1)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("adamw first step moves each coordinate by about lr") {
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  cfg.grad_norm_clip = 1e9;
  Vector theta = Vector::Zero(3);
  Vector g(3);
  g << 0.5, -2.0, 3.0;
  AdamWState st;
  const double norm = adamw_step(theta, g, st, cfg);
  CHECK(norm == doctest::Approx(g.norm()));
  for (int i = 0; i < 3; ++i) CHECK(theta[i] == doctest::Approx(-cfg.lr * (g[i] > 0 ? 1.0 : -1.0)).epsilon(1e-6));
}

TEST_CASE("standardizer gives zero mean and unit std") {
  Rng rng = make_rng(13);
  Matrix x = random_features(6, 500, rng);
  x.row(2) = (x.row(2).array() * 30.0 + 4.0).matrix();
  x.row(5).setConstant(3.0);
  const auto s = Standardizer::fit(x);
  const Matrix z = s.apply(x);
  for (int i = 0; i < 6; ++i) {
    const double mean = z.row(i).mean();
    CHECK(std::abs(mean) <= 1e-6);
    if (i != 5) {
      const double sd = std::sqrt((z.row(i).array() - mean).square().mean());
      CHECK(std::abs(sd - 1.0) <= 1e-6);
    }
  }
  CHECK(s.std[5] == 1.0);
}

TEST_CASE("checkpoint round trip is bit exact") {
  const auto env = Environment::make(EnvId::reacher);
  const auto p = small_model(env, 5, 14, 1.0);
  const auto path = (std::filesystem::temp_directory_path() / "miso_ckpt.bin").string();
  checkpoint_save(p, path);
  const auto q = checkpoint_load(path, EnvId::reacher, p.feature_dim);
  CHECK(q.K() == 5);
  CHECK(q.loss_kind == p.loss_kind);
  CHECK(std::memcmp(q.theta.data(), p.theta.data(), sizeof(double) * p.theta.size()) == 0);
  CHECK(checkpoint_encode(q) == checkpoint_encode(p));
  Rng rng = make_rng(14);
  for (int i = 0; i < 100; ++i) {
    const Vector f = random_features(p.feature_dim, 1, rng).col(0);
    const auto a = forward(p, f), b = forward(q, f);
    for (int k = 0; k < 5; ++k) CHECK(a.candidates[k] == b.candidates[k]);
  }
  CHECK_THROWS_AS(checkpoint_load(path, EnvId::cartpole), EnvMismatchError);
  CHECK_THROWS_AS(checkpoint_load(path, EnvId::reacher, p.feature_dim + 1), DimensionError);
  auto bytes = checkpoint_encode(p);
  bytes.resize(bytes.size() - 1);
  CHECK_THROWS_AS(checkpoint_decode(bytes), FormatError);
  bytes = checkpoint_encode(p);
  bytes[7] = 2;
  CHECK_THROWS_AS(checkpoint_decode(bytes), VersionError);
}
