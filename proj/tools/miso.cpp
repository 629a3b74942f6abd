// Command-line entry points: gen-data, train, eval, bench, toy.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "miso/core/dataset.hpp"
#include "miso/core/error.hpp"
#include "miso/envs/config.hpp"
#include "miso/harness/bench.hpp"
#include "miso/harness/data.hpp"
#include "miso/harness/eval.hpp"
#include "miso/harness/toy.hpp"
#include "miso/harness/train.hpp"
#include "miso/net/checkpoint.hpp"
#include "miso/parallel/exec.hpp"

using namespace miso;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

// "env" is a name, a path to an environment config, or an object of overrides.
Environment env_from(const json& cfg, const std::string& flag) {
  auto named = [](const std::string& s) {
    if (s.size() > 5 && s.ends_with(".json")) return Environment(load_env_config(s));
    return Environment::make(env_id_from_string(s));
  };
  if (!flag.empty()) return named(flag);
  if (!cfg.contains("env")) throw ConfigError("no environment given (--env or \"env\" in the config)");
  const json& e = cfg.at("env");
  if (e.is_string()) return named(e.get<std::string>());
  return Environment(env_params_from_json(e));
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct Common {
  int threads = 0;
  bool serial = false;

  Exec apply() const {
    if (threads > 0) set_num_threads(threads);
    return serial ? Exec::serial : Exec::parallel;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--threads", c.threads, "OpenMP thread count");
  app->add_flag("--serial", c.serial, "run the serial reference path");
}

int cmd_gen_data(const std::string& config, const std::string& env_flag, int episodes, int T, long long seed,
                 std::string out, const Common& common) {
  const json cfg = read_json(config);
  const Environment env = env_from(cfg, env_flag);
  GenDataConfig gc = default_gen_data_config(env.id());
  gc.episodes = cfg.value("episodes", gc.episodes);
  gc.episode_length = cfg.value("T_env", gc.episode_length);
  gc.seed = cfg.value("seed", gc.seed);
  if (cfg.contains("online")) gc.online = optimizer_config_from_json(cfg.at("online"));
  if (cfg.contains("oracle")) gc.oracle = optimizer_config_from_json(cfg.at("oracle"));
  if (episodes > 0) gc.episodes = episodes;
  if (T > 0) gc.episode_length = T;
  if (seed >= 0) gc.seed = static_cast<std::uint64_t>(seed);
  if (out.empty()) out = cfg.value("out", std::string());
  if (out.empty()) throw ConfigError("gen-data needs --out");

  const GeneratedData data = gen_data(env, gc, common.apply());
  write_generated(out, env, data);
  std::cout << to_json(data.summary).dump(2) << "\n";
  return 0;
}

int cmd_train(const std::string& config, const std::string& env_flag, std::string data_path, std::string out,
              const std::string& loss, int K, int epochs, long long seed, const Common& common) {
  json cfg = read_json(config);
  const Environment env = env_from(cfg, env_flag);
  json tj = cfg.value("train", json::object());
  if (!loss.empty()) tj["loss"] = loss;
  if (K > 0) tj["K"] = K;
  if (epochs > 0) tj["epochs"] = epochs;
  if (seed >= 0) tj["seed"] = seed;
  const TrainConfig tc = train_config_from_json(tj, env.id());
  if (data_path.empty()) data_path = cfg.value("data", std::string());
  if (out.empty()) out = cfg.value("out", std::string());
  if (data_path.empty() || out.empty()) throw ConfigError("train needs a dataset (--data) and --out");

  const Dataset ds = dataset_read(data_path, env.id());
  const TrainResult res = train(env, ds.records, tc, common.apply());
  checkpoint_save(res.best, out);
  json log = {{"config", to_json(tc)},
              {"best_epoch", res.best_epoch},
              {"train_count", res.train_count},
              {"val_count", res.val_count},
              {"epochs", json::array()}};
  for (const auto& e : res.log) log["epochs"].push_back(to_json(e));
  write_text(out + ".log.json", log.dump(2) + "\n");
  std::cout << "best epoch " << res.best_epoch << " validation loss "
            << res.log[static_cast<std::size_t>(res.best_epoch)].val_loss << "\n";
  return 0;
}

// Strategies come from the config's "strategies" list; --strategies keeps the
// named entries in the given order and builds model-free kinds by name.
std::vector<NamedStrategy> strategies_from(const json& cfg, const std::string& flag, const Environment& env) {
  std::vector<std::pair<std::string, StrategyConfig>> listed;
  for (const auto& s : cfg.value("strategies", json::array())) {
    const std::string kind = s.at("kind").get<std::string>();
    listed.emplace_back(s.value("name", kind), strategy_config_from_json(s));
  }
  std::vector<NamedStrategy> out;
  if (flag.empty()) {
    for (auto& [name, sc] : listed) out.push_back({name, Strategy(sc, env)});
  } else {
    for (const auto& name : split(flag)) {
      auto it = std::find_if(listed.begin(), listed.end(), [&](const auto& p) { return p.first == name; });
      if (it != listed.end()) {
        out.push_back({name, Strategy(it->second, env)});
        continue;
      }
      StrategyConfig sc;
      sc.kind = strategy_kind_from_string(name);
      if (is_learned(sc.kind)) throw ConfigError("strategy '" + name + "' needs a config entry with model paths");
      sc.validate();
      out.push_back({name, Strategy(sc, env)});
    }
  }
  if (out.empty()) throw ConfigError("no strategies to evaluate");
  return out;
}

int cmd_eval(const std::string& config, const std::string& env_flag, const std::string& mode,
             const std::string& execution, const std::string& strategies, std::string report, int count,
             long long seed, const Common& common) {
  const json cfg = read_json(config);
  const Environment env = env_from(cfg, env_flag);
  json ej = cfg.value("eval", json::object());
  if (!mode.empty()) ej["mode"] = mode;
  if (!execution.empty()) ej["execution"] = execution;
  if (seed >= 0) ej["seed"] = seed;
  if (cfg.contains("data_summary") && !ej.contains("divergence_penalty"))
    ej["divergence_penalty"] = read_json(cfg.at("data_summary").get<std::string>()).at("divergence_penalty");
  EvalConfig ec = eval_config_from_json(ej, env.id());
  if (count > 0) (ec.mode == EvalMode::one_off ? ec.instances : ec.episodes) = count;
  if (report.empty()) report = cfg.value("report", std::string());
  if (report.empty()) throw ConfigError("eval needs --report");

  const auto reports = evaluate(env, ec, strategies_from(cfg, strategies, env), common.apply());
  write_reports(report, reports);
  bool ok = true;
  for (const auto& r : reports) {
    std::printf("%-24s mean %.6g  se %.3g  n %zu  guarantee %d  monotone %d  feasibility %d  diverged %d\n",
                r.strategy.c_str(), r.mean_cost, r.std_error, r.rows.size(), r.guarantee_violations,
                r.monotone_violations, r.feasibility_violations, r.diverged);
    ok = ok && r.guarantee_violations == 0 && r.monotone_violations == 0 && r.feasibility_violations == 0;
  }
  if (!ok) std::fprintf(stderr, "audit failed: see %s\n", report.c_str());
  return ok ? 0 : 2;
}

int cmd_bench(const std::string& config, const std::string& env_flag, const std::string& ks, int reps,
              const std::string& out) {
  json cfg = read_json(config);
  if (env_flag.empty() && !cfg.contains("env")) cfg["env"] = "cartpole";
  const Environment env = env_from(cfg, env_flag);
  BenchConfig bc;
  bc.K = cfg.value("K", bc.K);
  bc.repetitions = cfg.value("repetitions", bc.repetitions);
  bc.warmup = cfg.value("warmup", bc.warmup);
  bc.hidden = cfg.value("hidden", bc.hidden);
  bc.embed = cfg.value("embed", bc.embed);
  if (!ks.empty()) {
    bc.K.clear();
    for (const auto& k : split(ks)) bc.K.push_back(std::stoi(k));
  }
  if (reps > 0) bc.repetitions = reps;

  const auto rows = bench_inference(env, bc);
  json j = json::array();
  std::printf("%4s %14s %14s %16s %16s\n", "K", "multi_ms", "multi_std", "ensemble_ms", "ensemble_std");
  for (const auto& r : rows) {
    std::printf("%4d %14.5f %14.5f %16.5f %16.5f\n", r.K, r.multi_mean_ms, r.multi_std_ms, r.ensemble_mean_ms,
                r.ensemble_std_ms);
    j.push_back(to_json(r));
  }
  if (!out.empty()) write_text(out, j.dump(2) + "\n");
  return 0;
}

int cmd_toy(const std::string& config, int epochs, long long seed, const Common& common) {
  const json cfg = read_json(config);
  ToyDemoConfig tc;
  tc.records = cfg.value("records", tc.records);
  tc.epochs = cfg.value("epochs", tc.epochs);
  tc.batch_size = cfg.value("batch_size", tc.batch_size);
  tc.lr = cfg.value("lr", tc.lr);
  tc.hidden = cfg.value("hidden", tc.hidden);
  tc.embed = cfg.value("embed", tc.embed);
  tc.seed = cfg.value("seed", tc.seed);
  if (epochs > 0) tc.epochs = epochs;
  if (seed >= 0) tc.seed = static_cast<std::uint64_t>(seed);
  std::cout << format_toy_table(toy_demo(tc, common.apply()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple initial solutions for local trajectory optimizers"};
  app.require_subcommand(1);

  std::string config, env, out, data, loss, mode, execution, strategies, report, ks;
  int episodes = 0, T = 0, K = 0, epochs = 0, count = 0, reps = 0;
  long long seed = -1;
  Common common;

  auto* gen = app.add_subcommand("gen-data", "generate a warm-start / oracle dataset");
  gen->add_option("--config", config, "JSON config");
  gen->add_option("--env", env, "toy1d, cartpole, reacher or driving");
  gen->add_option("--episodes", episodes);
  gen->add_option("--T-env", T, "steps per episode");
  gen->add_option("--seed", seed);
  gen->add_option("--out", out, "dataset path");
  add_common(gen, common);

  auto* tr = app.add_subcommand("train", "train a predictor");
  tr->add_option("--config", config, "JSON config");
  tr->add_option("--env", env);
  tr->add_option("--data", data, "dataset path");
  tr->add_option("--out", out, "checkpoint path");
  tr->add_option("--loss", loss, "regression, multi_output, pairwise, wta or mix");
  tr->add_option("--K", K);
  tr->add_option("--epochs", epochs);
  tr->add_option("--seed", seed);
  add_common(tr, common);

  auto* ev = app.add_subcommand("eval", "evaluate strategies");
  ev->add_option("--config", config, "JSON config");
  ev->add_option("--env", env);
  ev->add_option("--mode", mode, "one-off or sequential");
  ev->add_option("--execution", execution, "single or multiple");
  ev->add_option("--strategies", strategies, "comma-separated names");
  ev->add_option("--report", report, "JSON-lines report path");
  ev->add_option("--count", count, "instances (one-off) or episodes (sequential)");
  ev->add_option("--seed", seed);
  add_common(ev, common);

  auto* be = app.add_subcommand("bench", "time multi-output vs ensemble inference");
  be->add_option("--config", config, "JSON config");
  be->add_option("--env", env);
  be->add_option("--k", ks, "comma-separated K list");
  be->add_option("--repetitions", reps);
  be->add_option("--out", out, "JSON output path");

  auto* toy = app.add_subcommand("toy", "train the K=2 toy predictors and print their trajectories");
  toy->add_option("--config", config, "JSON config");
  toy->add_option("--epochs", epochs);
  toy->add_option("--seed", seed);
  add_common(toy, common);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_gen_data(config, env, episodes, T, seed, out, common);
    if (*tr) return cmd_train(config, env, data, out, loss, K, epochs, seed, common);
    if (*ev) return cmd_eval(config, env, mode, execution, strategies, report, count, seed, common);
    if (*be) return cmd_bench(config, env, ks, reps, out);
    if (*toy) return cmd_toy(config, epochs, seed, common);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
