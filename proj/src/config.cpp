#include "almpc/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace almpc {

namespace {

using nlohmann::json;

double get_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
  return j.at(key).get<double>();
}

void read_vehicle(const json& j, VehicleParams& p) {
  p.m = get_or(j, "m", p.m);
  p.I = get_or(j, "I", p.I);
  p.lf = get_or(j, "lf", p.lf);
  p.lr = get_or(j, "lr", p.lr);
  p.Cd = get_or(j, "Cd", p.Cd);
  p.A = get_or(j, "A", p.A);
  p.rho = get_or(j, "rho", p.rho);
  p.mu = get_or(j, "mu", p.mu);
  p.g = get_or(j, "g", p.g);
  p.eps = get_or(j, "eps", p.eps);
}

void read_tire(const json& j, const VehicleParams& vp, PacejkaCoeffs& t) {
  const double B = get_or(j, "B", t.B);
  const double C = get_or(j, "C", t.C);
  t = PacejkaCoeffs::from_params(vp, B, C);
  t.Fz_front = get_or(j, "Fz_front", t.Fz_front);
  t.Fz_rear = get_or(j, "Fz_rear", t.Fz_rear);
}

Eigen::VectorXd read_vec(const json& j, const char* key, const Eigen::VectorXd& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& node = j.at(key);
  if (!node.is_array() || static_cast<Eigen::Index>(node.size()) != fallback.size()) {
    throw ConfigError(std::string("config: '") + key + "' must be an array of " +
                      std::to_string(fallback.size()) + " numbers");
  }
  Eigen::VectorXd v(fallback.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = node.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

void read_mpc(const json& j, MpcConfig& m) {
  m.Np = static_cast<int>(get_or(j, "Np", m.Np));
  m.Ts = get_or(j, "Ts", m.Ts);
  m.q_diag = read_vec(j, "q_diag", m.q_diag);
  m.r_diag = read_vec(j, "r_diag", m.r_diag);
  m.u_min = read_vec(j, "u_min", m.u_min);
  m.u_max = read_vec(j, "u_max", m.u_max);
  m.du_min = read_vec(j, "du_min", m.du_min);
  m.du_max = read_vec(j, "du_max", m.du_max);
  m.ye_bound = get_or(j, "ye_bound", m.ye_bound);
  m.slack_weight = get_or(j, "slack_weight", m.slack_weight);
  m.qp_tol = get_or(j, "qp_tol", m.qp_tol);
  m.qp_max_iter = static_cast<int>(get_or(j, "qp_max_iter", m.qp_max_iter));
}

void read_track(const json& j, TrackSpec& t) {
  if (!j.contains("segments")) return;
  t.segments.clear();
  for (const auto& seg : j.at("segments")) {
    TrackSegment s;
    const std::string kind = seg.at("kind").get<std::string>();
    if (kind == "straight") {
      s.kind = TrackSegment::Kind::Straight;
      s.curvature = 0.0;
    } else if (kind == "arc") {
      s.kind = TrackSegment::Kind::Arc;
      s.curvature = seg.at("curvature").get<double>();
    } else {
      throw ConfigError("config: segment kind must be 'straight' or 'arc'");
    }
    s.length = seg.at("length").get<double>();
    t.segments.push_back(s);
  }
}

void read_speed(const json& j, SpeedProfile& p) {
  if (!j.contains("knots")) return;
  p.knots.clear();
  for (const auto& kn : j.at("knots")) {
    if (kn.is_array()) {
      p.knots.push_back({kn.at(0).get<double>(), kn.at(1).get<double>()});
    } else {
      p.knots.push_back({kn.at("s").get<double>(), kn.at("v").get<double>()});
    }
  }
}

void read_wind(const json& j, WindProfile& w) {
  w.base = get_or(j, "base", w.base);
  w.amplitude = get_or(j, "amplitude", w.amplitude);
  w.period = get_or(j, "period", w.period);
  w.noise_std = get_or(j, "noise_std", w.noise_std);
  if (j.contains("seed")) w.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("clip")) {
    w.clip_lo = j.at("clip").at(0).get<double>();
    w.clip_hi = j.at("clip").at(1).get<double>();
  }
}

void read_ga(const json& j, GaConfig& g) {
  g.generations = static_cast<int>(get_or(j, "generations", g.generations));
  g.pop_size = static_cast<int>(get_or(j, "pop_size", g.pop_size));
  g.offspring_fraction = get_or(j, "offspring_fraction", g.offspring_fraction);
  g.beta = get_or(j, "beta", g.beta);
  g.mutation_rate = get_or(j, "mutation_rate", g.mutation_rate);
  g.mutation_sigma = get_or(j, "mutation_sigma", g.mutation_sigma);
  g.tournament_size = static_cast<int>(get_or(j, "tournament_size", g.tournament_size));
  g.elite_count = static_cast<int>(get_or(j, "elite_count", g.elite_count));
  if (j.contains("seed")) g.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("selection")) {
    const std::string sel = j.at("selection").get<std::string>();
    if (sel == "hybrid") {
      g.selection = SelectionMode::Hybrid;
    } else if (sel == "rws") {
      g.selection = SelectionMode::RwsOnly;
    } else if (sel == "ts") {
      g.selection = SelectionMode::TsOnly;
    } else {
      throw ConfigError("config: ga.selection must be hybrid|rws|ts");
    }
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }

  ExperimentConfig cfg = ExperimentConfig::desk_default();
  try {
    if (j.contains("vehicle")) read_vehicle(j.at("vehicle"), cfg.vehicle);
    // tire defaults depend on the (possibly overridden) vehicle
    cfg.tire = PacejkaCoeffs::from_params(cfg.vehicle);
    if (j.contains("tire")) read_tire(j.at("tire"), cfg.vehicle, cfg.tire);
    if (j.contains("mpc")) read_mpc(j.at("mpc"), cfg.mpc);
    if (j.contains("track")) read_track(j.at("track"), cfg.track);
    if (j.contains("speed")) read_speed(j.at("speed"), cfg.speed);
    if (j.contains("wind")) read_wind(j.at("wind"), cfg.wind);
    if (j.contains("ga")) read_ga(j.at("ga"), cfg.ga);
    if (j.contains("adaptation")) cfg.adaptation = j.at("adaptation").get<bool>();
    if (j.contains("model_path")) cfg.model_path = j.at("model_path").get<std::string>();
    if (j.contains("nominal_stiffness")) {
      cfg.nominal_stiffness.cf = j.at("nominal_stiffness").at("cf").get<double>();
      cfg.nominal_stiffness.cr = j.at("nominal_stiffness").at("cr").get<double>();
    }
    cfg.duration = get_or(j, "duration", cfg.duration);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["vehicle"] = {{"m", cfg.vehicle.m}, {"I", cfg.vehicle.I}, {"lf", cfg.vehicle.lf},
                  {"lr", cfg.vehicle.lr}, {"Cd", cfg.vehicle.Cd}, {"A", cfg.vehicle.A},
                  {"rho", cfg.vehicle.rho}, {"mu", cfg.vehicle.mu}, {"g", cfg.vehicle.g},
                  {"eps", cfg.vehicle.eps}};
  j["tire"] = {{"B", cfg.tire.B}, {"C", cfg.tire.C}, {"Fz_front", cfg.tire.Fz_front},
               {"Fz_rear", cfg.tire.Fz_rear}};
  j["mpc"] = {{"Np", cfg.mpc.Np},
              {"Ts", cfg.mpc.Ts},
              {"q_diag", std::vector<double>(cfg.mpc.q_diag.data(), cfg.mpc.q_diag.data() + 5)},
              {"r_diag", std::vector<double>(cfg.mpc.r_diag.data(), cfg.mpc.r_diag.data() + 2)},
              {"u_min", std::vector<double>(cfg.mpc.u_min.data(), cfg.mpc.u_min.data() + 2)},
              {"u_max", std::vector<double>(cfg.mpc.u_max.data(), cfg.mpc.u_max.data() + 2)},
              {"du_min", std::vector<double>(cfg.mpc.du_min.data(), cfg.mpc.du_min.data() + 2)},
              {"du_max", std::vector<double>(cfg.mpc.du_max.data(), cfg.mpc.du_max.data() + 2)},
              {"ye_bound", cfg.mpc.ye_bound},
              {"slack_weight", cfg.mpc.slack_weight},
              {"qp_tol", cfg.mpc.qp_tol},
              {"qp_max_iter", cfg.mpc.qp_max_iter}};
  j["track"]["segments"] = json::array();
  for (const auto& seg : cfg.track.segments) {
    json s;
    s["kind"] = seg.kind == TrackSegment::Kind::Straight ? "straight" : "arc";
    s["length"] = seg.length;
    if (seg.kind == TrackSegment::Kind::Arc) s["curvature"] = seg.curvature;
    j["track"]["segments"].push_back(s);
  }
  j["speed"]["knots"] = json::array();
  for (const auto& kn : cfg.speed.knots) {
    j["speed"]["knots"].push_back({{"s", kn.s}, {"v", kn.v}});
  }
  j["wind"] = {{"base", cfg.wind.base},       {"amplitude", cfg.wind.amplitude},
               {"period", cfg.wind.period},   {"noise_std", cfg.wind.noise_std},
               {"seed", cfg.wind.seed},       {"clip", {cfg.wind.clip_lo, cfg.wind.clip_hi}}};
  const char* sel = cfg.ga.selection == SelectionMode::Hybrid
                        ? "hybrid"
                        : (cfg.ga.selection == SelectionMode::RwsOnly ? "rws" : "ts");
  j["ga"] = {{"generations", cfg.ga.generations},
             {"pop_size", cfg.ga.pop_size},
             {"offspring_fraction", cfg.ga.offspring_fraction},
             {"beta", cfg.ga.beta},
             {"mutation_rate", cfg.ga.mutation_rate},
             {"mutation_sigma", cfg.ga.mutation_sigma},
             {"tournament_size", cfg.ga.tournament_size},
             {"elite_count", cfg.ga.elite_count},
             {"seed", cfg.ga.seed},
             {"selection", sel}};
  j["adaptation"] = cfg.adaptation;
  j["model_path"] = cfg.model_path;
  j["nominal_stiffness"] = {{"cf", cfg.nominal_stiffness.cf}, {"cr", cfg.nominal_stiffness.cr}};
  j["duration"] = cfg.duration;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

void save_experiment_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write config file: " + path);
  out << experiment_config_to_json(cfg) << "\n";
}

}  // namespace almpc
