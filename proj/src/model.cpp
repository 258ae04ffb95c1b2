#include "pgqr/model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace pgqr {

using nlohmann::json;

void LambdaGrid::validate() const {
  if (values.empty()) throw std::invalid_argument("LambdaGrid: empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) throw std::invalid_argument("LambdaGrid: values must be finite and >= 0");
    if (i > 0 && !(values[i] > values[i - 1])) throw std::invalid_argument("LambdaGrid: values must be strictly ascending");
  }
}

LambdaGrid LambdaGrid::equispaced(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("LambdaGrid: count must be >= 1");
  LambdaGrid g;
  if (count == 1) {
    g.values = {lo};
  } else {
    for (int i = 0; i < count; ++i) g.values.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
  }
  g.validate();
  return g;
}

namespace {

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw std::runtime_error("checkpoint: matrix size mismatch");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

json matrices_to_json(const std::vector<Matrix>& ms) {
  json a = json::array();
  for (const Matrix& m : ms) a.push_back(matrix_to_json(m));
  return a;
}

std::vector<Matrix> matrices_from_json(const json& j) {
  std::vector<Matrix> out;
  for (const json& e : j) out.push_back(matrix_from_json(e));
  return out;
}

json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const json& j) {
  const auto d = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
}

}  // namespace

void save_checkpoint(const FittedModel& model, const std::filesystem::path& path) {
  const PMNNConfig& c = model.config;
  json j;
  j["format"] = "pgqr-checkpoint";
  j["format_version"] = kCheckpointVersion;
  j["seed"] = model.seed;
  j["alpha"] = model.alpha;
  j["config"] = {{"k1", c.k1},
                 {"k2", c.k2},
                 {"width", c.width},
                 {"gc_activation", to_string(c.gc_activation)},
                 {"guc_activation", to_string(c.guc_activation)},
                 {"connection_activation", to_string(c.connection_activation)},
                 {"lambda_as_input", c.lambda_as_input},
                 {"activate_subnet_outputs", c.activate_subnet_outputs},
                 {"lambda_lo", c.lambda_lo},
                 {"lambda_hi", c.lambda_hi}};
  j["lambda_grid"] = model.grid.values;
  j["standardization"] = {{"x_mean", vector_to_json(model.stats.x_mean)},
                          {"x_sd", vector_to_json(model.stats.x_sd)},
                          {"y_mean", model.stats.y_mean},
                          {"y_sd", model.stats.y_sd}};
  const PMNNParams& p = model.params;
  j["params"] = {{"gc_raw_weights", matrices_to_json(p.gc_raw_weights)},
                 {"gc_biases", matrices_to_json(p.gc_biases)},
                 {"guc_weights", matrices_to_json(p.guc_weights)},
                 {"guc_biases", matrices_to_json(p.guc_biases)},
                 {"f_raw_weights", matrix_to_json(p.f_raw_weights)},
                 {"f_bias", matrix_to_json(p.f_bias)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot write " + path.string());
  out << j.dump(1) << '\n';
}

FittedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("load_checkpoint: " + path.string() + " is not valid JSON: " + e.what());
  }
  if (j.value("format", "") != "pgqr-checkpoint") throw std::runtime_error("load_checkpoint: not a pgqr checkpoint");
  const int version = j.at("format_version").get<int>();
  if (version != kCheckpointVersion)
    throw std::runtime_error("load_checkpoint: unsupported format_version " + std::to_string(version));

  FittedModel m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.alpha = j.at("alpha").get<double>();
  const json& c = j.at("config");
  m.config.k1 = c.at("k1").get<int>();
  m.config.k2 = c.at("k2").get<int>();
  m.config.width = c.at("width").get<int>();
  m.config.gc_activation = activation_from_string(c.at("gc_activation").get<std::string>());
  m.config.guc_activation = activation_from_string(c.at("guc_activation").get<std::string>());
  m.config.connection_activation = activation_from_string(c.at("connection_activation").get<std::string>());
  m.config.lambda_as_input = c.at("lambda_as_input").get<bool>();
  m.config.activate_subnet_outputs = c.at("activate_subnet_outputs").get<bool>();
  m.config.lambda_lo = c.at("lambda_lo").get<double>();
  m.config.lambda_hi = c.at("lambda_hi").get<double>();
  m.grid.values = j.at("lambda_grid").get<std::vector<double>>();
  const json& s = j.at("standardization");
  m.stats.x_mean = vector_from_json(s.at("x_mean"));
  m.stats.x_sd = vector_from_json(s.at("x_sd"));
  m.stats.y_mean = s.at("y_mean").get<double>();
  m.stats.y_sd = s.at("y_sd").get<double>();
  const json& p = j.at("params");
  m.params.gc_raw_weights = matrices_from_json(p.at("gc_raw_weights"));
  m.params.gc_biases = matrices_from_json(p.at("gc_biases"));
  m.params.guc_weights = matrices_from_json(p.at("guc_weights"));
  m.params.guc_biases = matrices_from_json(p.at("guc_biases"));
  m.params.f_raw_weights = matrix_from_json(p.at("f_raw_weights"));
  m.params.f_bias = matrix_from_json(p.at("f_bias"));

  m.config.validate();
  m.grid.validate();
  check_shapes(m.config, m.params, m.p());
  return m;
}

}  // namespace pgqr
