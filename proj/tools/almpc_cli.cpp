// Command-line front end for the almpc toolkit. Talks to the shared library
// exclusively through the C API in almpc.h.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "almpc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct ConfigDeleter {
  void operator()(almpc_config* c) const { almpc_config_free(c); }
};
struct RunDeleter {
  void operator()(almpc_run* r) const { almpc_run_free(r); }
};
using ConfigPtr = std::unique_ptr<almpc_config, ConfigDeleter>;
using RunPtr = std::unique_ptr<almpc_run, RunDeleter>;

int status_to_exit(almpc_status s) {
  switch (s) {
    case ALMPC_OK:
      return kExitOk;
    case ALMPC_ERR_RUNTIME:
      return kExitRuntime;
    default:
      return kExitConfig;
  }
}

int fail(almpc_status s) {
  std::fprintf(stderr, "error: %s\n", almpc_last_error());
  return status_to_exit(s);
}

ConfigPtr load_config(const std::string& path, almpc_status& status) {
  almpc_config* raw = nullptr;
  status = path.empty() ? almpc_config_default(&raw) : almpc_config_load(path.c_str(), &raw);
  return ConfigPtr(raw);
}

void print_owned(char* s) {
  if (s != nullptr) {
    std::printf("%s\n", s);
    almpc_string_free(s);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"almpc — adaptive LPV-MPC vehicle control toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path, data_path, run_path, history_path;
  bool no_adapt = false;
  bool has_seed = false, has_tol = false, has_iter = false;
  std::uint64_t seed = 0;
  double qp_tol = 1e-6;
  int qp_max_iter = 4000;
  int points = 10752;
  int n_seeds = 20;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config JSON");
    cmd->add_option("--seed", seed, "override the experiment seed")
        ->each([&](const std::string&) { has_seed = true; });
    cmd->add_option("--qp-tol", qp_tol, "QP solver tolerance")
        ->each([&](const std::string&) { has_tol = true; });
    cmd->add_option("--qp-max-iter", qp_max_iter, "QP solver iteration cap")
        ->each([&](const std::string&) { has_iter = true; });
  };

  auto* simulate = app.add_subcommand("simulate", "run the closed-loop experiment");
  add_common(simulate);
  simulate->add_option("--out", out_path, "run log CSV output")->required();
  simulate->add_flag("--no-adapt", no_adapt, "disable NN adaptation (nominal stiffness)");

  auto* tune = app.add_subcommand("tune-ga", "GA-tune the MPC weights");
  add_common(tune);
  tune->add_option("--out", out_path, "best weights JSON output")->required();
  tune->add_option("--history", history_path, "per-generation fitness CSV");

  auto* gen = app.add_subcommand("gen-data", "generate a labeled stiffness dataset");
  add_common(gen);
  gen->add_option("--points", points, "number of samples");
  gen->add_option("--out", out_path, "dataset CSV output")->required();

  auto* train_cmd = app.add_subcommand("train-nn", "train the stiffness estimator");
  add_common(train_cmd);
  train_cmd->add_option("--data", data_path, "dataset CSV")->required();
  train_cmd->add_option("--out", out_path, "model JSON output")->required();

  auto* bench = app.add_subcommand("bench-ga", "sphere benchmark of the GA selectors");
  add_common(bench);
  bench->add_option("--seeds", n_seeds, "number of seeded repetitions");
  bench->add_option("--out", out_path, "output directory for per-variant CSVs")->required();

  auto* report = app.add_subcommand("report", "print metrics JSON for a run log");
  add_common(report);
  report->add_option("--run", run_path, "run log CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  almpc_status status = ALMPC_OK;
  ConfigPtr cfg = load_config(config_path, status);
  if (!cfg) return fail(status);
  if (has_seed) almpc_config_set_seed(cfg.get(), seed);
  if (has_tol || has_iter) {
    const almpc_status s = almpc_config_set_qp(cfg.get(), qp_tol, qp_max_iter);
    if (s != ALMPC_OK) return fail(s);
  }

  if (simulate->parsed()) {
    if (no_adapt) almpc_config_set_adaptation(cfg.get(), 0);
    almpc_run* raw = nullptr;
    const almpc_status s = almpc_simulate(cfg.get(), &raw);
    RunPtr run(raw);
    if (!run) return fail(s);
    if (s == ALMPC_ERR_RUNTIME) {
      std::fprintf(stderr, "warning: %s (exporting partial log)\n", almpc_last_error());
    }
    const almpc_status es = almpc_run_export_csv(run.get(), out_path.c_str());
    if (es != ALMPC_OK) return fail(es);
    std::printf("wrote %d records to %s\n", almpc_run_record_count(run.get()), out_path.c_str());
    return status_to_exit(s);
  }

  if (tune->parsed()) {
    char* summary = nullptr;
    const almpc_status s =
        almpc_tune_ga(cfg.get(), history_path.empty() ? nullptr : history_path.c_str(),
                      out_path.c_str(), &summary);
    if (s != ALMPC_OK) return fail(s);
    print_owned(summary);
    return kExitOk;
  }

  if (gen->parsed()) {
    const almpc_status s =
        almpc_generate_dataset(cfg.get(), points, has_seed ? seed : 0, out_path.c_str());
    if (s != ALMPC_OK) return fail(s);
    std::printf("wrote %d samples to %s\n", points, out_path.c_str());
    return kExitOk;
  }

  if (train_cmd->parsed()) {
    char* summary = nullptr;
    const almpc_status s =
        almpc_train_model(cfg.get(), data_path.c_str(), out_path.c_str(), &summary);
    if (s != ALMPC_OK) return fail(s);
    print_owned(summary);
    return kExitOk;
  }

  if (bench->parsed()) {
    char* summary = nullptr;
    const almpc_status s = almpc_bench_ga(cfg.get(), n_seeds, out_path.c_str(), &summary);
    if (s != ALMPC_OK) return fail(s);
    print_owned(summary);
    return kExitOk;
  }

  if (report->parsed()) {
    almpc_run* raw = nullptr;
    almpc_status s = almpc_run_load_csv(run_path.c_str(), &raw);
    RunPtr run(raw);
    if (!run) return fail(s);
    char* json = nullptr;
    s = almpc_run_metrics_json(run.get(), cfg.get(), &json);
    if (s != ALMPC_OK) return fail(s);
    print_owned(json);
    return kExitOk;
  }

  return kExitConfig;
}
