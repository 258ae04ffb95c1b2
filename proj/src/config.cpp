#include "pgqr/config.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

namespace pgqr {

using nlohmann::json;

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Simulate: return "simulate";
    case Mode::Train: return "train";
    case Mode::SelectLambda: return "select-lambda";
    case Mode::Evaluate: return "evaluate";
    case Mode::Predict: return "predict";
    case Mode::Report: return "report";
  }
  return "?";
}

Mode mode_from_string(std::string_view s) {
  for (Mode m : {Mode::Simulate, Mode::Train, Mode::SelectLambda, Mode::Evaluate, Mode::Predict, Mode::Report})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

void RunConfig::validate(bool check_mode) const {
  const double total = split[0] + split[1] + split[2];
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("config: split fractions must sum to 1");
  if (replicates < 1) throw std::invalid_argument("config: replicates must be >= 1");
  if (pit_draws < 1) throw std::invalid_argument("config: selection.pit_draws must be >= 1");
  if (cde.b < 2) throw std::invalid_argument("config: cde.b must be >= 2");
  if (!(cde.level > 0.0 && cde.level < 1.0)) throw std::invalid_argument("config: cde.level must lie in (0,1)");
  for (std::size_t i = 0; i < cde.taus.size(); ++i) {
    if (!(cde.taus[i] > 0.0 && cde.taus[i] < 1.0)) throw std::invalid_argument("config: cde.taus must lie in (0,1)");
    if (i > 0 && cde.taus[i] <= cde.taus[i - 1]) throw std::invalid_argument("config: cde.taus must be ascending");
  }
  if (check_mode && (mode == Mode::Report || mode == Mode::Simulate) && !sim)
    throw std::invalid_argument("config: mode '" + std::string(to_string(mode)) + "' needs a simulated data source");
  if (check_mode && mode == Mode::Train && !sim && data_path.empty())
    throw std::invalid_argument("config: mode 'train' needs data.sim or data.csv");
  if (sim && sim->n < 1) throw std::invalid_argument("config: data.n must be >= 1");
  train.validate();
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw std::invalid_argument(std::string("config: '") + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string config_to_json(const RunConfig& c) {
  json j;
  j["format"] = "pgqr-config";
  j["version"] = kConfigVersion;
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  json data = json::object();
  if (c.sim) {
    data["sim"] = to_string(c.sim->kind);
    data["n"] = c.sim->n;
    data["sim_seed"] = c.sim->seed;
  } else {
    data["csv"] = c.data_path.string();
  }
  data["target"] = c.target;
  j["data"] = data;
  j["split"] = c.split;
  j["output_dir"] = c.output_dir.string();
  j["replicates"] = c.replicates;
  const TrainConfig& t = c.train;
  j["train"] = {{"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"optimizer", to_string(t.optimizer.kind)},
                {"learning_rate", t.optimizer.learning_rate},
                {"beta1", t.optimizer.beta1},
                {"beta2", t.optimizer.beta2},
                {"epsilon", t.optimizer.epsilon},
                {"final_lr_fraction", t.optimizer.final_lr_fraction},
                {"standardize_response", t.standardize_response},
                {"alpha", t.alpha},
                {"lambda_grid", t.lambda_grid.values}};
  const PMNNConfig& m = t.pmnn;
  j["model"] = {{"k1", m.k1},
                {"k2", m.k2},
                {"width", m.width},
                {"gc_activation", to_string(m.gc_activation)},
                {"guc_activation", to_string(m.guc_activation)},
                {"connection_activation", to_string(m.connection_activation)},
                {"lambda_as_input", m.lambda_as_input},
                {"activate_subnet_outputs", m.activate_subnet_outputs}};
  j["selection"] = {{"pit_draws", c.pit_draws}};
  j["cde"] = {{"b", c.cde.b}, {"grid_size", c.cde.grid_size}, {"level", c.cde.level}, {"taus", c.cde.taus}};
  return j.dump(2) + "\n";
}

RunConfig config_from_json(std::string_view text, bool check_mode) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  reject_unknown(j, {"format", "version", "mode", "seed", "data", "split", "output_dir", "replicates", "train", "model",
                     "selection", "cde"},
                 "top level");
  if (j.contains("format") && j.at("format") != "pgqr-config") throw std::invalid_argument("config: not a pgqr config");
  if (j.contains("version") && j.at("version").get<int>() != kConfigVersion)
    throw std::invalid_argument("config: unsupported version " + j.at("version").dump());

  RunConfig c;
  if (j.contains("mode")) c.mode = mode_from_string(j.at("mode").get<std::string>());
  read(j, "seed", c.seed);
  if (j.contains("data")) {
    const json& d = j.at("data");
    reject_unknown(d, {"sim", "n", "sim_seed", "csv", "target"}, "data");
    if (d.contains("sim")) {
      SimSpec s;
      s.kind = sim_from_string(d.at("sim").get<std::string>());
      read(d, "n", s.n);
      read(d, "sim_seed", s.seed);
      c.sim = s;
    }
    if (d.contains("csv")) c.data_path = d.at("csv").get<std::string>();
    read(d, "target", c.target);
  }
  if (j.contains("split")) c.split = j.at("split").get<std::array<double, 3>>();
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  read(j, "replicates", c.replicates);
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t,
                   {"epochs", "batch_size", "optimizer", "learning_rate", "beta1", "beta2", "epsilon", "final_lr_fraction",
                    "alpha", "lambda_grid", "standardize_response"},
                   "train");
    read(t, "epochs", c.train.epochs);
    read(t, "batch_size", c.train.batch_size);
    if (t.contains("optimizer")) c.train.optimizer.kind = optimizer_from_string(t.at("optimizer").get<std::string>());
    read(t, "learning_rate", c.train.optimizer.learning_rate);
    read(t, "beta1", c.train.optimizer.beta1);
    read(t, "beta2", c.train.optimizer.beta2);
    read(t, "epsilon", c.train.optimizer.epsilon);
    read(t, "final_lr_fraction", c.train.optimizer.final_lr_fraction);
    read(t, "standardize_response", c.train.standardize_response);
    read(t, "alpha", c.train.alpha);
    if (t.contains("lambda_grid")) {
      const json& g = t.at("lambda_grid");
      if (g.is_array()) {
        c.train.lambda_grid.values = g.get<std::vector<double>>();
      } else {
        reject_unknown(g, {"lo", "hi", "count"}, "train.lambda_grid");
        c.train.lambda_grid =
            LambdaGrid::equispaced(g.value("lo", 0.0), g.value("hi", 1.0), g.value("count", 100));
      }
    }
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown(m, {"k1", "k2", "width", "gc_activation", "guc_activation", "connection_activation",
                       "lambda_as_input", "activate_subnet_outputs"},
                   "model");
    PMNNConfig& p = c.train.pmnn;
    read(m, "k1", p.k1);
    read(m, "k2", p.k2);
    read(m, "width", p.width);
    if (m.contains("gc_activation")) p.gc_activation = activation_from_string(m.at("gc_activation").get<std::string>());
    if (m.contains("guc_activation")) p.guc_activation = activation_from_string(m.at("guc_activation").get<std::string>());
    if (m.contains("connection_activation"))
      p.connection_activation = activation_from_string(m.at("connection_activation").get<std::string>());
    read(m, "lambda_as_input", p.lambda_as_input);
    read(m, "activate_subnet_outputs", p.activate_subnet_outputs);
  }
  if (j.contains("selection")) {
    reject_unknown(j.at("selection"), {"pit_draws"}, "selection");
    read(j.at("selection"), "pit_draws", c.pit_draws);
  }
  if (j.contains("cde")) {
    const json& d = j.at("cde");
    reject_unknown(d, {"b", "grid_size", "level", "taus"}, "cde");
    read(d, "b", c.cde.b);
    read(d, "grid_size", c.cde.grid_size);
    read(d, "level", c.cde.level);
    if (d.contains("taus")) c.cde.taus = d.at("taus").get<std::vector<double>>();
  }
  c.train.seed = c.seed;
  c.validate(check_mode && j.contains("mode"));
  return c;
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_config: cannot write " + path.string());
  out << config_to_json(config);
}

RunConfig load_config(const std::filesystem::path& path, bool check_mode) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), check_mode);
}

}  // namespace pgqr
