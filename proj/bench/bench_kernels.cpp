// Serial reference vs OpenMP timing of the data-parallel kernels. Each pair of
// runs is also checked for identical output.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>

#include <CLI11.hpp>

#include "miso/core/rng.hpp"
#include "miso/core/rollout.hpp"
#include "miso/init/strategy.hpp"
#include "miso/losses/losses.hpp"
#include "miso/parallel/kernels.hpp"
#include "miso/optim/optimizers.hpp"

using namespace miso;

namespace {

double best_ms(int reps, const std::function<void()>& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

bool same(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void report(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-28s %10.3f %10.3f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
              identical ? "identical" : "MISMATCH");
}

std::vector<ControlSequence> random_sequences(const Environment& env, int n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ControlSequence> out;
  for (int i = 0; i < n; ++i) {
    Matrix c(env.horizon(), env.control_dim());
    for (Eigen::Index t = 0; t < c.rows(); ++t)
      for (Eigen::Index j = 0; j < c.cols(); ++j) c(t, j) = env.u_min()[j] + u(rng) * (env.u_max()[j] - env.u_min()[j]);
    out.emplace_back(c);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel timing"};
  std::string env_name = "cartpole";
  int n = 256, reps = 5, threads = 0;
  app.add_option("--env", env_name);
  app.add_option("--n", n, "batch size per kernel");
  app.add_option("--repetitions", reps);
  app.add_option("--threads", threads);
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_num_threads(threads);

  const Environment env = Environment::make(env_id_from_string(env_name));
  Rng rng = make_rng(1);
  const ProblemInstance psi = env.sample_instance(rng);
  const EnvProblem problem(env, psi);
  const auto seqs = random_sequences(env, n, 2);

  std::printf("env %s, n %d, threads %d, best of %d\n", env_name.c_str(), n, num_threads(), reps);
  std::printf("%-28s %10s %10s %9s\n", "kernel", "serial_ms", "omp_ms", "speedup");

  {
    std::vector<double> a, b;
    const double s = best_ms(reps, [&] { a = kernels::rollout_costs(problem, seqs, Exec::serial); });
    const double p = best_ms(reps, [&] { b = kernels::rollout_costs(problem, seqs, Exec::parallel); });
    report("rollout_costs", s, p, same(a, b));
  }
  {
    const Vector sigma = 0.1 * (env.u_max() - env.u_min());
    std::vector<ControlSequence> a, b;
    const double s = best_ms(reps, [&] { a = kernels::perturb(seqs[0], n, sigma, 3, Exec::serial); });
    const double p = best_ms(reps, [&] { b = kernels::perturb(seqs[0], n, sigma, 3, Exec::parallel); });
    bool ok = a.size() == b.size();
    for (std::size_t i = 0; ok && i < a.size(); ++i) ok = a[i].controls == b[i].controls;
    report("perturb", s, p, ok);
  }
  {
    StrategyConfig sc;
    sc.kind = StrategyKind::warm_start_perturb;
    sc.K = 32;
    sc.include_default = true;
    const Strategy strategy(sc, env);
    RunContext ctx;
    ctx.env = &env;
    ctx.psi = psi;
    ctx.online = online_profile(env.id());
    ctx.oracle = oracle_profile(env.id());
    ctx.seed = 4;
    StrategyRun a, b;
    const double s = best_ms(reps, [&] { a = run_multiple_optimizers(strategy, ctx, Exec::serial); });
    const double p = best_ms(reps, [&] { b = run_multiple_optimizers(strategy, ctx, Exec::parallel); });
    report("per-candidate solves (K=33)", s, p, same(a.final_costs, b.final_costs));
  }
  {
    const LossConfig cfg = default_loss_config(env.id(), LossKind::mix);
    std::vector<DatasetRecord> records(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      records[i].instance = psi;
      records[i].oracle_controls = seqs[static_cast<std::size_t>((i + 1) % n)];
      records[i].oracle_states = rollout(env, psi, records[i].oracle_controls).states;
      records[i].warm_start = seqs[static_cast<std::size_t>(i)];
    }
    const std::vector<ControlSequence> cands(seqs.begin(), seqs.begin() + std::min(n, 8));
    std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    auto run = [&](Exec e, std::vector<double>& out) {
      for_each_index(e, out.size(), [&](std::size_t i) { out[i] = evaluate_loss(env, cands, records[i], cfg).value; });
    };
    const double s = best_ms(reps, [&] { run(Exec::serial, a); });
    const double p = best_ms(reps, [&] { run(Exec::parallel, b); });
    report("loss evaluation (K=8)", s, p, same(a, b));
  }
  return 0;
}
