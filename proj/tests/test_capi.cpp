#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "almpc.h"

namespace {

// short windless run so the suite stays fast
const char* kQuickConfig = R"json({
  "track": {"segments": [{"kind": "straight", "length": 400.0}]},
  "speed": {"knots": [{"s": 0.0, "v": 12.0}, {"s": 400.0, "v": 12.0}]},
  "wind": {"base": 0.0, "amplitude": 0.0, "noise_std": 0.0, "clip": [0.0, 0.0]},
  "adaptation": false,
  "duration": 5.0,
  "seed": 3
})json";

}  // namespace

TEST_CASE("version and error strings are always present") {
  CHECK(almpc_version() != nullptr);
  CHECK(almpc_last_error() != nullptr);
}

TEST_CASE("config: default, json parsing, setters") {
  almpc_config* cfg = nullptr;
  REQUIRE(almpc_config_default(&cfg) == ALMPC_OK);
  REQUIRE(cfg != nullptr);
  CHECK(almpc_config_set_seed(cfg, 7) == ALMPC_OK);
  CHECK(almpc_config_set_adaptation(cfg, 0) == ALMPC_OK);
  CHECK(almpc_config_set_qp(cfg, 1e-6, 2000) == ALMPC_OK);
  CHECK(almpc_config_set_qp(cfg, -1.0, 2000) == ALMPC_ERR_INVALID);

  char* json = nullptr;
  REQUIRE(almpc_config_to_json(cfg, &json) == ALMPC_OK);
  REQUIRE(json != nullptr);
  CHECK(std::strstr(json, "\"seed\": 7") != nullptr);
  almpc_string_free(json);
  almpc_config_free(cfg);
}

TEST_CASE("config: io and parse failures map to status codes") {
  almpc_config* cfg = nullptr;
  CHECK(almpc_config_load("does_not_exist.json", &cfg) == ALMPC_ERR_IO);
  CHECK(cfg == nullptr);
  CHECK(almpc_config_from_json("{broken", &cfg) == ALMPC_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(almpc_config_from_json(R"({"duration": -5})", &cfg) == ALMPC_ERR_CONFIG);
  CHECK(almpc_config_load(nullptr, &cfg) == ALMPC_ERR_INVALID);
  CHECK(std::strlen(almpc_last_error()) > 0);
}

TEST_CASE("simulate -> export -> reload -> metrics round trip") {
  almpc_config* cfg = nullptr;
  REQUIRE(almpc_config_from_json(kQuickConfig, &cfg) == ALMPC_OK);

  almpc_run* run = nullptr;
  REQUIRE(almpc_simulate(cfg, &run) == ALMPC_OK);
  REQUIRE(run != nullptr);
  CHECK(almpc_run_aborted(run) == 0);
  CHECK(almpc_run_record_count(run) == 152);  // floor(5/0.033)+1

  const char* path = "test_capi_run.csv";
  REQUIRE(almpc_run_export_csv(run, path) == ALMPC_OK);

  almpc_run* reloaded = nullptr;
  REQUIRE(almpc_run_load_csv(path, &reloaded) == ALMPC_OK);
  CHECK(almpc_run_record_count(reloaded) == almpc_run_record_count(run));

  char* metrics = nullptr;
  REQUIRE(almpc_run_metrics_json(reloaded, cfg, &metrics) == ALMPC_OK);
  REQUIRE(metrics != nullptr);
  CHECK(std::strstr(metrics, "rmse_ye") != nullptr);
  CHECK(std::strstr(metrics, "constraint_violations") != nullptr);

  almpc_string_free(metrics);
  almpc_run_free(reloaded);
  almpc_run_free(run);
  almpc_config_free(cfg);
  std::remove(path);
}

TEST_CASE("dataset generation writes the documented header") {
  almpc_config* cfg = nullptr;
  REQUIRE(almpc_config_default(&cfg) == ALMPC_OK);
  const char* path = "test_capi_data.csv";
  REQUIRE(almpc_generate_dataset(cfg, 1200, 5, path) == ALMPC_OK);
  std::ifstream in(path);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header == "vx,vy,delta,ax,omega,cf,cr");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 1200);
  almpc_config_free(cfg);
  std::remove(path);
}

TEST_CASE("invalid handles are rejected") {
  CHECK(almpc_simulate(nullptr, nullptr) == ALMPC_ERR_INVALID);
  CHECK(almpc_run_export_csv(nullptr, "x.csv") == ALMPC_ERR_INVALID);
  CHECK(almpc_run_record_count(nullptr) == 0);
  CHECK(almpc_run_aborted(nullptr) == 0);
  almpc_run_free(nullptr);
  almpc_config_free(nullptr);
  almpc_string_free(nullptr);
}
