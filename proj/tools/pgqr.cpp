#include "pgqr/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace fs = std::filesystem;
using namespace pgqr;

namespace {

RunConfig base_config(const std::string& path) {
  return path.empty() ? RunConfig{} : load_config(path, false);
}

Dataset read_data(const std::string& stage, const fs::path& out, const fs::path& path, const std::string& target) {
  Dataset d;
  run_stage(stage, out, [&] { d = load_csv(path, target); });
  return d;
}

FittedModel read_model(const std::string& stage, const fs::path& out, const fs::path& path) {
  FittedModel m;
  run_stage(stage, out, [&] { m = load_checkpoint(path); });
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized generative quantile regression"};
  app.require_subcommand(1);

  std::string out = "out";
  std::string sim = "linear";
  int n = 2000;
  std::uint64_t seed = 1;
  auto* simulate = app.add_subcommand("simulate", "Draw a simulated dataset");
  simulate->add_option("--sim", sim, "linear, 1, 2, 3, 4 or 5")->required();
  simulate->add_option("--n", n, "Number of rows")->capture_default_str();
  simulate->add_option("--seed", seed, "Seed")->capture_default_str();
  simulate->add_option("--out", out, "Output directory")->capture_default_str();

  std::string data, target = "y", config_path;
  auto* train = app.add_subcommand("train", "Fit the generator on a CSV");
  train->add_option("--data", data, "Headed CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--target", target, "Response column")->capture_default_str();
  train->add_option("--config", config_path, "JSON run config (defaults when omitted)");
  train->add_option("--out", out, "Output directory")->capture_default_str();

  std::string checkpoint, val;
  int draws = 1000;
  auto* select = app.add_subcommand("select-lambda", "Pick lambda by PIT uniformity on validation data");
  select->add_option("--checkpoint", checkpoint, "checkpoint.json")->required()->check(CLI::ExistingFile);
  select->add_option("--val", val, "Validation CSV")->required()->check(CLI::ExistingFile);
  select->add_option("--target", target, "Response column")->capture_default_str();
  select->add_option("--draws", draws, "Quantile levels per point (M)")->capture_default_str();
  select->add_option("--seed", seed, "Seed")->capture_default_str();
  select->add_option("--out", out, "Output directory")->capture_default_str();

  double lambda_star = 0.0;
  std::string points;
  CdeOptions cde;
  auto* predict = app.add_subcommand("predict", "Conditional density, quantiles and interval per point");
  predict->add_option("--checkpoint", checkpoint, "checkpoint.json")->required()->check(CLI::ExistingFile);
  predict->add_option("--lambda-star", lambda_star, "Selected lambda")->required();
  predict->add_option("--points", points, "CSV of covariate rows")->required()->check(CLI::ExistingFile);
  predict->add_option("--target", target, "Column to ignore if present")->capture_default_str();
  predict->add_option("--b", cde.b, "Generated samples per point")->capture_default_str();
  predict->add_option("--seed", seed, "Seed")->capture_default_str();
  predict->add_option("--out", out, "Output directory")->capture_default_str();

  std::string test, oracle_name;
  std::optional<double> lambda_opt;
  auto* evaluate = app.add_subcommand("evaluate", "Metrics on a test CSV");
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint.json")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--test", test, "Test CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--oracle", oracle_name, "Simulation whose law generated the data");
  evaluate->add_option("--lambda-star", lambda_opt, "Defaults to selection.json beside the checkpoint");
  evaluate->add_option("--target", target, "Response column")->capture_default_str();
  evaluate->add_option("--seed", seed, "Seed")->capture_default_str();
  evaluate->add_option("--out", out, "Output directory")->capture_default_str();

  std::optional<int> replicates;
  auto* report = app.add_subcommand("report", "simulate, train, select-lambda and evaluate over replicates");
  report->add_option("--config", config_path, "JSON run config")->required()->check(CLI::ExistingFile);
  report->add_option("--replicates", replicates, "Overrides the config");
  report->add_option("--out", out, "Output directory (overrides the config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      SimSpec spec;
      run_stage("simulate", out, [&] {
        spec = SimSpec{sim_from_string(sim), n, seed};
        run_simulate(spec, out);
      });
    } else if (*train) {
      RunConfig cfg;
      run_stage("config", out, [&] { cfg = base_config(config_path); });
      const Dataset d = read_data("load", out, data, target);
      TrainOutcome o;
      run_stage("train", out, [&] { o = run_train(d, cfg, out); });
      std::cout << "trained " << o.report.steps << " steps, final loss "
                << (o.report.epoch_loss.empty() ? 0.0 : o.report.epoch_loss.back()) << '\n';
    } else if (*select) {
      const FittedModel m = read_model("load", out, checkpoint);
      const Dataset v = read_data("load", out, val, target);
      run_stage("select-lambda", out, [&] {
        const LambdaSelection s = run_select_lambda(m, v, draws, seed, out);
        std::cout << "lambda_star " << format_double(s.lambda_star) << '\n';
      });
    } else if (*predict) {
      const FittedModel m = read_model("load", out, checkpoint);
      Matrix x;
      run_stage("load", out, [&] { x = load_points(points, target); });
      run_stage("predict", out, [&] { run_predict(m, lambda_star, x, cde, seed, out); });
    } else if (*evaluate) {
      const FittedModel m = read_model("load", out, checkpoint);
      const Dataset t = read_data("load", out, test, target);
      double ls = 0.0;
      run_stage("load", out, [&] {
        ls = lambda_opt ? *lambda_opt : read_selection(fs::path(checkpoint).parent_path() / "selection.json");
      });
      std::unique_ptr<Oracle> oracle;
      run_stage("oracle", out, [&] {
        if (!oracle_name.empty()) oracle = oracle_for(sim_from_string(oracle_name));
      });
      run_stage("evaluate", out, [&] {
        const Evaluation ev =
            run_evaluate(m, t, ls, oracle.get(), oracle_name.empty() ? "data" : oracle_name, cde, seed, out);
        std::cout << "coverage " << ev.metrics.coverage << " width " << ev.metrics.avg_width << '\n';
      });
    } else if (*report) {
      RunConfig cfg;
      run_stage("config", out, [&] {
        cfg = load_config(config_path, false);
        cfg.mode = Mode::Report;
        if (replicates) cfg.replicates = *replicates;
        if (!report->get_option("--out")->empty()) cfg.output_dir = out;
        cfg.validate();
      });
      const MetricsReport r = run_report(cfg);
      std::cout << "pmse_mean " << r.pmse_mean << " pmse_sd " << r.pmse_sd << " coverage " << r.coverage << '\n';
    }
  } catch (const StageError& e) {
    std::cerr << "pgqr: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
