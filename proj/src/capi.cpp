#include "almpc.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "almpc/config.hpp"
#include "almpc/sim.hpp"

struct almpc_config {
  almpc::ExperimentConfig cfg;
};

struct almpc_run {
  almpc::RunLog log;
};

namespace {

thread_local std::string g_last_error = "";

void set_error(const std::string& msg) { g_last_error = msg; }

almpc_status classify(const std::exception& e) {
  set_error(e.what());
  if (dynamic_cast<const almpc::IoFailure*>(&e) != nullptr) return ALMPC_ERR_IO;
  if (dynamic_cast<const almpc::ConfigError*>(&e) != nullptr) return ALMPC_ERR_CONFIG;
  return ALMPC_ERR_RUNTIME;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* almpc_version(void) { return "0.1.0"; }

const char* almpc_last_error(void) { return g_last_error.c_str(); }

void almpc_string_free(char* s) { delete[] s; }

almpc_status almpc_config_load(const char* path, almpc_config** out) {
  if (path == nullptr || out == nullptr) {
    set_error("almpc_config_load: null argument");
    return ALMPC_ERR_INVALID;
  }
  try {
    auto* handle = new almpc_config{almpc::load_experiment_config(path)};
    *out = handle;
    return ALMPC_OK;
  } catch (const std::exception& e) {
    *out = nullptr;
    return classify(e);
  }
}

almpc_status almpc_config_from_json(const char* json_text, almpc_config** out) {
  if (json_text == nullptr || out == nullptr) {
    set_error("almpc_config_from_json: null argument");
    return ALMPC_ERR_INVALID;
  }
  try {
    auto* handle = new almpc_config{almpc::parse_experiment_config(json_text)};
    *out = handle;
    return ALMPC_OK;
  } catch (const std::exception& e) {
    *out = nullptr;
    return classify(e);
  }
}

almpc_status almpc_config_default(almpc_config** out) {
  if (out == nullptr) {
    set_error("almpc_config_default: null argument");
    return ALMPC_ERR_INVALID;
  }
  *out = new almpc_config{almpc::ExperimentConfig::desk_default()};
  return ALMPC_OK;
}

almpc_status almpc_config_to_json(const almpc_config* cfg, char** json_out) {
  if (cfg == nullptr || json_out == nullptr) {
    set_error("almpc_config_to_json: null argument");
    return ALMPC_ERR_INVALID;
  }
  try {
    *json_out = dup_string(almpc::experiment_config_to_json(cfg->cfg));
    return ALMPC_OK;
  } catch (const std::exception& e) {
    *json_out = nullptr;
    return classify(e);
  }
}

void almpc_config_free(almpc_config* cfg) { delete cfg; }

almpc_status almpc_config_set_seed(almpc_config* cfg, uint64_t seed) {
  if (cfg == nullptr) {
    set_error("almpc_config_set_seed: null handle");
    return ALMPC_ERR_INVALID;
  }
  cfg->cfg.seed = seed;
  return ALMPC_OK;
}

almpc_status almpc_config_set_adaptation(almpc_config* cfg, int on) {
  if (cfg == nullptr) {
    set_error("almpc_config_set_adaptation: null handle");
    return ALMPC_ERR_INVALID;
  }
  cfg->cfg.adaptation = (on != 0);
  return ALMPC_OK;
}

almpc_status almpc_config_set_qp(almpc_config* cfg, double tol, int max_iter) {
  if (cfg == nullptr || tol <= 0.0 || max_iter < 1) {
    set_error("almpc_config_set_qp: bad arguments");
    return ALMPC_ERR_INVALID;
  }
  cfg->cfg.mpc.qp_tol = tol;
  cfg->cfg.mpc.qp_max_iter = max_iter;
  return ALMPC_OK;
}

almpc_status almpc_config_set_model_path(almpc_config* cfg, const char* path) {
  if (cfg == nullptr || path == nullptr) {
    set_error("almpc_config_set_model_path: null argument");
    return ALMPC_ERR_INVALID;
  }
  cfg->cfg.model_path = path;
  return ALMPC_OK;
}

almpc_status almpc_config_set_weights(almpc_config* cfg, const double q_diag[5],
                                      const double r_diag[2]) {
  if (cfg == nullptr || q_diag == nullptr || r_diag == nullptr) {
    set_error("almpc_config_set_weights: null argument");
    return ALMPC_ERR_INVALID;
  }
  for (int i = 0; i < 5; ++i) cfg->cfg.mpc.q_diag(i) = q_diag[i];
  for (int i = 0; i < 2; ++i) cfg->cfg.mpc.r_diag(i) = r_diag[i];
  return ALMPC_OK;
}

almpc_status almpc_simulate(const almpc_config* cfg, almpc_run** out) {
  if (cfg == nullptr || out == nullptr) {
    set_error("almpc_simulate: null argument");
    return ALMPC_ERR_INVALID;
  }
  *out = nullptr;
  try {
    almpc::RunLog log = almpc::run_closed_loop(cfg->cfg);
    const bool aborted = log.aborted;
    if (aborted) set_error("run aborted: " + log.abort_reason);
    *out = new almpc_run{std::move(log)};
    return aborted ? ALMPC_ERR_RUNTIME : ALMPC_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

almpc_status almpc_run_export_csv(const almpc_run* run, const char* path) {
  if (run == nullptr || path == nullptr) {
    set_error("almpc_run_export_csv: null argument");
    return ALMPC_ERR_INVALID;
  }
  try {
    almpc::export_csv(run->log, path);
    return ALMPC_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

almpc_status almpc_run_load_csv(const char* path, almpc_run** out) {
  if (path == nullptr || out == nullptr) {
    set_error("almpc_run_load_csv: null argument");
    return ALMPC_ERR_INVALID;
  }
  try {
    *out = new almpc_run{almpc::import_csv(path)};
    return ALMPC_OK;
  } catch (const std::exception& e) {
    *out = nullptr;
    return classify(e);
  }
}

almpc_status almpc_run_metrics_json(const almpc_run* run, const almpc_config* cfg,
                                    char** json_out) {
  if (run == nullptr || cfg == nullptr || json_out == nullptr) {
    set_error("almpc_run_metrics_json: null argument");
    return ALMPC_ERR_INVALID;
  }
  try {
    const almpc::Metrics m = almpc::compute_metrics(run->log, cfg->cfg.mpc);
    *json_out = dup_string(almpc::metrics_to_json(m));
    return ALMPC_OK;
  } catch (const std::exception& e) {
    *json_out = nullptr;
    return classify(e);
  }
}

int almpc_run_record_count(const almpc_run* run) {
  return run == nullptr ? 0 : static_cast<int>(run->log.records.size());
}

int almpc_run_aborted(const almpc_run* run) {
  return (run != nullptr && run->log.aborted) ? 1 : 0;
}

void almpc_run_free(almpc_run* run) { delete run; }

almpc_status almpc_generate_dataset(const almpc_config* cfg, int n_points, uint64_t seed,
                                    const char* csv_path) {
  if (cfg == nullptr || csv_path == nullptr) {
    set_error("almpc_generate_dataset: null argument");
    return ALMPC_ERR_INVALID;
  }
  try {
    const almpc::StiffnessDataset ds = almpc::generate_dataset(
        cfg->cfg.vehicle, cfg->cfg.tire, almpc::ManeuverPlan{}, n_points, seed);
    almpc::save_dataset_csv(ds, csv_path);
    return ALMPC_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

almpc_status almpc_train_model(const almpc_config* cfg, const char* data_csv,
                               const char* model_path, char** summary_json) {
  if (cfg == nullptr || data_csv == nullptr || model_path == nullptr) {
    set_error("almpc_train_model: null argument");
    return ALMPC_ERR_INVALID;
  }
  try {
    const almpc::StiffnessDataset ds = almpc::load_dataset_csv(data_csv);
    almpc::StiffnessModel model;
    almpc::TrainConfig tc;
    tc.seed = cfg->cfg.seed;
    model.net = almpc::Mlp({5, 16, 28, 16, 9, 2}, tc.seed);
    const almpc::TrainResult tr = almpc::train(model, ds, tc);
    model.save(model_path);

    if (summary_json != nullptr) {
      const Eigen::MatrixXd pred = model.predict_batch(ds.features);
      nlohmann::json j;
      j["epochs"] = tr.train_loss.size();
      j["final_train_loss"] = tr.train_loss.empty() ? 0.0 : tr.train_loss.back();
      j["final_val_loss"] = tr.val_loss.empty() ? 0.0 : tr.val_loss.back();
      j["r2_all"] = almpc::r2_score(pred, ds.targets);
      j["model_path"] = model_path;
      *summary_json = dup_string(j.dump(2));
    }
    return ALMPC_OK;
  } catch (const std::exception& e) {
    if (summary_json != nullptr) *summary_json = nullptr;
    return classify(e);
  }
}

almpc_status almpc_tune_ga(const almpc_config* cfg, const char* history_csv,
                           const char* best_json, char** summary_json) {
  if (cfg == nullptr) {
    set_error("almpc_tune_ga: null handle");
    return ALMPC_ERR_INVALID;
  }
  try {
    almpc::ExperimentConfig scenario = cfg->cfg;
    almpc::StiffnessModel model;
    const almpc::StiffnessModel* model_ptr = nullptr;
    if (scenario.adaptation) {
      model = almpc::StiffnessModel::load(scenario.model_path);
      model_ptr = &model;
    }
    const almpc::TuneResult result = almpc::tune_weights(scenario, model_ptr, true);

    if (history_csv != nullptr) {
      std::ofstream out(history_csv);
      if (!out) throw almpc::IoFailure(std::string("cannot write history: ") + history_csv);
      out << "gen,best_fitness,mean_fitness\n";
      for (std::size_t g = 0; g < result.ga.history.size(); ++g) {
        out << g << "," << result.ga.history[g] << "," << result.ga.mean_history[g] << "\n";
      }
    }

    nlohmann::json j;
    j["best_fitness"] = result.ga.best.fitness;
    j["evaluations"] = result.ga.evaluations;
    j["q_diag"] = std::vector<double>(result.tuned.q_diag.data(), result.tuned.q_diag.data() + 5);
    j["r_diag"] = std::vector<double>(result.tuned.r_diag.data(), result.tuned.r_diag.data() + 2);
    if (best_json != nullptr) {
      std::ofstream out(best_json);
      if (!out) throw almpc::IoFailure(std::string("cannot write best weights: ") + best_json);
      out << j.dump(2) << "\n";
    }
    if (summary_json != nullptr) *summary_json = dup_string(j.dump(2));
    return ALMPC_OK;
  } catch (const std::exception& e) {
    if (summary_json != nullptr) *summary_json = nullptr;
    return classify(e);
  }
}

almpc_status almpc_bench_ga(const almpc_config* cfg, int n_seeds, const char* out_dir,
                            char** summary_json) {
  if (cfg == nullptr || n_seeds < 1) {
    set_error("almpc_bench_ga: bad arguments");
    return ALMPC_ERR_INVALID;
  }
  try {
    almpc::SphereBenchConfig bc;
    bc.seeds = n_seeds;
    bc.base = cfg->cfg.ga;
    const almpc::SphereBenchResult res = almpc::bench_ga_sphere(bc);

    if (out_dir != nullptr) {
      std::filesystem::create_directories(out_dir);
      const auto dump = [&](const char* name, const std::vector<std::vector<double>>& hist) {
        const std::string path = std::string(out_dir) + "/" + name;
        std::ofstream out(path);
        if (!out) throw almpc::IoFailure("cannot write " + path);
        out << "seed,gen,best_fitness\n";
        for (std::size_t seed = 0; seed < hist.size(); ++seed) {
          for (std::size_t g = 0; g < hist[seed].size(); ++g) {
            out << seed << "," << g << "," << hist[seed][g] << "\n";
          }
        }
      };
      dump("hybrid.csv", res.history_hybrid);
      dump("rws.csv", res.history_rws);
      dump("ts.csv", res.history_ts);
    }

    nlohmann::json j;
    j["seeds"] = n_seeds;
    j["mean_hybrid"] = res.mean_hybrid;
    j["mean_rws"] = res.mean_rws;
    j["mean_ts"] = res.mean_ts;
    j["p_hybrid_vs_rws"] = res.p_vs_rws;
    j["p_hybrid_vs_ts"] = res.p_vs_ts;
    if (summary_json != nullptr) *summary_json = dup_string(j.dump(2));
    return ALMPC_OK;
  } catch (const std::exception& e) {
    if (summary_json != nullptr) *summary_json = nullptr;
    return classify(e);
  }
}

}  // extern "C"
