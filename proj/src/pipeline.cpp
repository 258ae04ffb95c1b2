#include "pgqr/pipeline.hpp"

#include "pgqr/kernels.hpp"
#include "pgqr/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace pgqr {

namespace fs = std::filesystem;
using nlohmann::json;

void run_stage(const std::string& stage, const fs::path& dir, const std::function<void()>& body) {
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream marker(dir / kFailureMarker);
    marker << stage << ": " << e.what() << '\n';
    throw StageError(stage, e.what());
  }
}

Matrix load_points(const fs::path& path, const std::string& target) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_points: cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  in.close();
  if (header.find(target) != std::string::npos) {
    std::stringstream ss(header);
    std::string cell;
    while (std::getline(ss, cell, ','))
      if (cell == target) return load_csv(path, target).x;
  }
  // No target column: append a dummy one so the CSV reader can be reused.
  const fs::path tmp = fs::temp_directory_path() / ("pgqr_points_" + std::to_string(std::hash<std::string>{}(path.string())) + ".csv");
  {
    std::ifstream src(path);
    std::ofstream dst(tmp);
    std::string line;
    bool first = true;
    while (std::getline(src, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      dst << line << ',' << (first ? "__pgqr_target" : "0") << '\n';
      first = false;
    }
  }
  Matrix x = load_csv(tmp, "__pgqr_target").x;
  fs::remove(tmp);
  return x;
}

Evaluation evaluate_model(const FittedModel& model, const Dataset& test, double lambda_star, const Oracle* oracle,
                          const CdeOptions& options, Rng& rng) {
  if (test.n() == 0) throw std::invalid_argument("evaluate: empty test set");
  if (test.p() != model.p()) throw std::invalid_argument("evaluate: covariate dimension mismatch");
  if (options.b < 2) throw std::invalid_argument("evaluate: b must be >= 2");
  std::vector<double> xi(static_cast<std::size_t>(options.b));
  for (double& v : xi) v = rng.uniform01();

  const Matrix xs = model.stats.transform_x(test.x);
  const Matrix qf = kernels::quantile_features(model.config, model.params, xi);
  const Matrix g = kernels::connect_parallel(kernels::Connection::from(model.config, model.params), qf,
                                             kernels::data_features(model.config, model.params, xs, lambda_star));

  const auto n = static_cast<std::size_t>(test.n());
  Evaluation ev;
  ev.generated.resize(n);
  ev.intervals.resize(n);
  std::vector<double> est_mean(n), est_sd(n), true_mean(n), true_sd(n);
  Matrix truth(test.n(), static_cast<Eigen::Index>(options.taus.size()));
  std::vector<double> row(xi.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = model.stats.y_to_original(g(ii, static_cast<Eigen::Index>(k)));
    ev.generated[i] = moments(row);
    ev.intervals[i] = prediction_interval(row, options.level);
    est_mean[i] = ev.generated[i].mean;
    est_sd[i] = ev.generated[i].sd;
    if (oracle) {
      const Oracle::Summary s = oracle->summarize(test.x.row(ii).transpose(), options.taus);
      true_mean[i] = s.mean;
      true_sd[i] = s.sd;
      for (std::size_t k = 0; k < s.quantiles.size(); ++k) truth(ii, static_cast<Eigen::Index>(k)) = s.quantiles[k];
    }
  }
  ev.curves = quantile_curves(model, test.x, options.taus, lambda_star);

  MetricsReport& m = ev.metrics;
  const std::vector<double> y(test.y.data(), test.y.data() + test.y.size());
  const CoverageWidth cw = coverage_width(ev.intervals, y);
  m.coverage = cw.coverage;
  m.avg_width = cw.avg_width;
  m.crossing_violations = crossing_audit(ev.curves);
  if (oracle) {
    m.pmse_mean = pmse(est_mean, true_mean);
    m.pmse_sd = pmse(est_sd, true_sd);
    m.quantile_pmse = quantile_pmse(ev.curves, truth, options.taus);
  } else {
    m.pmse_mean = m.pmse_sd = std::numeric_limits<double>::quiet_NaN();
  }
  return ev;
}

Dataset run_simulate(const SimSpec& spec, const fs::path& out) {
  fs::create_directories(out);
  Dataset d = generate_data(spec);
  save_csv(d, out / "data.csv");
  json side = {{"sim", to_string(spec.kind)}, {"n", spec.n}, {"seed", spec.seed}, {"p", covariate_dim(spec.kind)}};
  std::ofstream(out / "data.json") << side.dump(2) << '\n';
  return d;
}

TrainOutcome run_train(const Dataset& data, const RunConfig& config, const fs::path& out) {
  fs::create_directories(out);
  TrainOutcome o;
  o.parts = split(data, config.split, substream_seed(config.seed, "split"));
  save_csv(o.parts.train, out / "train.csv");
  save_csv(o.parts.validation, out / "validation.csv");
  save_csv(o.parts.test, out / "test.csv");
  TrainConfig tc = config.train;
  tc.seed = config.seed;
  FitResult fitted = fit(o.parts.train, tc);
  o.model = std::move(fitted.model);
  o.report = std::move(fitted.report);
  save_checkpoint(o.model, out / "checkpoint.json");
  std::ofstream log(out / "train_log.csv");
  log << "epoch,mean_loss,seconds\n";
  for (std::size_t e = 0; e < o.report.epoch_loss.size(); ++e)
    log << e + 1 << ',' << format_double(o.report.epoch_loss[e]) << ',' << format_double(o.report.epoch_seconds[e])
        << '\n';
  return o;
}

LambdaSelection run_select_lambda(const FittedModel& model, const Dataset& validation, int draws, std::uint64_t seed,
                                  const fs::path& out) {
  fs::create_directories(out);
  Rng rng = substream(seed, "pit");
  LambdaSelection sel = select_lambda(model, validation, draws, rng);
  write_lambda_table(sel, out / "lambda_table.csv");
  json j = {{"lambda_star", sel.lambda_star}, {"pit_draws", draws}, {"seed", seed}};
  std::ofstream(out / "selection.json") << j.dump(2) << '\n';
  return sel;
}

double read_selection(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j = json::parse(in);
  return j.at("lambda_star").get<double>();
}

void run_predict(const FittedModel& model, double lambda_star, const Matrix& points, const CdeOptions& options,
                 std::uint64_t seed, const fs::path& out) {
  fs::create_directories(out);
  Rng rng = substream(seed, "xi");
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const CdeReport r = build_report(model, points.row(i).transpose(), lambda_star, options, rng);
    write_cde_csv(r, out / ("cde_point_" + std::to_string(i) + ".csv"));
  }
}

Evaluation run_evaluate(const FittedModel& model, const Dataset& test, double lambda_star, const Oracle* oracle,
                        const std::string& sim_name, const CdeOptions& options, std::uint64_t seed,
                        const fs::path& out) {
  fs::create_directories(out);
  Rng rng = substream(seed, "xi");
  Evaluation ev = evaluate_model(model, test, lambda_star, oracle, options, rng);
  const TableRow row{"PGQR", sim_name, ev.metrics};
  write_metrics_table(std::span(&row, 1), out / "metrics.csv");
  write_quantile_table(std::span(&row, 1), out / "quantile_pmse.csv");
  return ev;
}

MetricsReport run_report(const RunConfig& config) {
  config.validate();
  if (!config.sim) throw StageError("config", "report needs a simulated data source");
  const fs::path root = config.output_dir;
  fs::create_directories(root);
  save_config(config, root / "config.json");
  const std::string sim_name = to_string(config.sim->kind);
  std::unique_ptr<Oracle> oracle;
  run_stage("oracle", root, [&] { oracle = oracle_for(config.sim->kind); });

  std::vector<MetricsReport> reps;
  for (int r = 0; r < config.replicates; ++r) {
    const fs::path dir = root / ("rep_" + std::to_string(r));
    RunConfig rc = config;
    rc.seed = config.seed + static_cast<std::uint64_t>(r);
    rc.train.seed = rc.seed;
    SimSpec spec = *config.sim;
    spec.seed += static_cast<std::uint64_t>(r);

    Dataset data;
    TrainOutcome trained;
    LambdaSelection sel;
    Evaluation ev;
    run_stage("simulate", dir, [&] { data = run_simulate(spec, dir); });
    run_stage("train", dir, [&] { trained = run_train(data, rc, dir); });
    run_stage("select-lambda", dir,
              [&] { sel = run_select_lambda(trained.model, trained.parts.validation, rc.pit_draws, rc.seed, dir); });
    run_stage("evaluate", dir, [&] {
      ev = run_evaluate(trained.model, trained.parts.test, sel.lambda_star, oracle.get(), sim_name, rc.cde, rc.seed,
                        dir);
    });
    run_stage("predict", dir,
              [&] { run_predict(trained.model, sel.lambda_star, trained.parts.test.x, rc.cde, rc.seed, dir / "cde"); });
    reps.push_back(ev.metrics);
  }
  MetricsReport agg = aggregate(reps);
  const TableRow row{"PGQR", sim_name, agg};
  run_stage("report", root, [&] {
    write_metrics_table(std::span(&row, 1), root / "metrics.csv");
    write_quantile_table(std::span(&row, 1), root / "quantile_pmse.csv");
  });
  return agg;
}

}  // namespace pgqr
