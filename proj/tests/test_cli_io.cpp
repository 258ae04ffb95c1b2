#include "pgqr/config.hpp"
#include "pgqr/dataset.hpp"
#include "pgqr/model.hpp"
#include "pgqr/pipeline.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

using namespace pgqr;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

RunConfig tiny_config() {
  RunConfig c;
  c.train.epochs = 2;
  c.train.batch_size = 16;
  c.train.pmnn.width = 6;
  c.train.lambda_grid = LambdaGrid::equispaced(0.0, 1.0, 4);
  c.pit_draws = 20;
  c.cde.b = 30;
  c.cde.grid_size = 16;
  return c;
}

int run_cli(const std::string& args) { return std::system((std::string(PGQR_CLI) + " " + args + " >/dev/null 2>&1").c_str()); }

}  // namespace

TEST_CASE("csv ingestion") {
  const auto dir = testing::scratch_dir("csv");
  write_file(dir / "ok.csv", "a,y,b\n1,2,3\n4,5,6\n7,8,9\n");
  const Dataset d = load_csv(dir / "ok.csv", "y");
  CHECK(d.n() == 3);
  CHECK(d.p() == 2);
  CHECK(d.columns == std::vector<std::string>{"a", "b"});
  CHECK(d.x(1, 1) == 6.0);
  CHECK(d.y[2] == 8.0);

  const std::string absent = error_of([&] { load_csv(dir / "ok.csv", "target"); });
  CHECK(absent.find("'target'") != std::string::npos);

  write_file(dir / "blank.csv", "a,y\n1,2\n3,\n");
  const std::string blank = error_of([&] { load_csv(dir / "blank.csv", "y"); });
  CHECK(blank.find("row 3") != std::string::npos);
  CHECK(blank.find("column 2") != std::string::npos);

  write_file(dir / "text.csv", "a,y\n1,2\nx,3\n");
  CHECK(error_of([&] { load_csv(dir / "text.csv", "y"); }).find("row 3, column 1") != std::string::npos);
}

TEST_CASE("csv round trip is exact") {
  const auto dir = testing::scratch_dir("csv_round");
  const Dataset d = generate_data(SimSpec{SimKind::Sim2, 50, 3});
  save_csv(d, dir / "d.csv");
  const Dataset back = load_csv(dir / "d.csv", "y");
  CHECK(back.x == d.x);
  CHECK(back.y == d.y);
  CHECK(back.columns == d.columns);
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("split sizes and determinism") {
  const Dataset d1000 = generate_data(SimSpec{SimKind::Sim1, 1000, 1});
  const Split s = split(d1000, {0.8, 0.1, 0.1}, 5);
  CHECK(s.train.n() == 800);
  CHECK(s.validation.n() == 100);
  CHECK(s.test.n() == 100);

  const Dataset d557 = generate_data(SimSpec{SimKind::Sim1, 557, 1});
  const Split m = split(d557, {0.8, 0.1, 0.1}, 5);
  CHECK(m.train.n() == 445);
  CHECK(m.validation.n() == 55);
  CHECK(m.test.n() == 57);
  std::set<std::size_t> all(m.train_rows.begin(), m.train_rows.end());
  all.insert(m.validation_rows.begin(), m.validation_rows.end());
  all.insert(m.test_rows.begin(), m.test_rows.end());
  CHECK(all.size() == 557);

  CHECK(split(d557, {0.8, 0.1, 0.1}, 5).train_rows == m.train_rows);
  CHECK_FALSE(split(d557, {0.8, 0.1, 0.1}, 6).train_rows == m.train_rows);
  CHECK_THROWS_AS(split(d557, {0.8, 0.1, 0.2}, 1), std::invalid_argument);
  const Dataset tiny = generate_data(SimSpec{SimKind::Sim1, 5, 1});
  CHECK_THROWS_AS(split(tiny, {0.8, 0.1, 0.1}, 1), std::invalid_argument);
}

TEST_CASE("standardization uses training statistics") {
  Dataset d;
  d.x.resize(3, 2);
  d.x << 1, 5, 2, 5, 3, 5;
  d.y = Vector::LinSpaced(3, 0.0, 4.0);
  const Standardizer s = fit_standardizer(d);
  CHECK(s.x_mean[0] == 2.0);
  CHECK(s.x_sd[0] == 1.0);
  CHECK(s.x_sd[1] == 1.0);  // constant column keeps sd 1
  CHECK(s.y_mean == 2.0);
  CHECK(s.y_sd == 2.0);
  const Dataset z = standardize(d, s);
  CHECK(z.x(0, 0) == -1.0);
  CHECK(z.x(0, 1) == 0.0);
  CHECK(z.y[2] == 1.0);
  CHECK(s.y_to_original(s.y_to_standard(3.7)) == doctest::Approx(3.7));
}

TEST_CASE("checkpoint round trip is bit exact") {
  const auto dir = testing::scratch_dir("ckpt");
  const Dataset d = generate_data(SimSpec{SimKind::Sim3, 200, 2});
  RunConfig c = tiny_config();
  const FitResult f = fit(d, c.train);
  save_checkpoint(f.model, dir / "m.json");
  const FittedModel back = load_checkpoint(dir / "m.json");
  CHECK(back == f.model);
  CHECK(back.params.checksum() == f.report.checksum);

  write_file(dir / "bad.json", "{\"format\":\"pgqr-checkpoint\",\"format_version\":99}");
  CHECK_THROWS(load_checkpoint(dir / "bad.json"));
}

TEST_CASE("config materializes defaults and rejects unknown keys") {
  const RunConfig defaults = config_from_json("{}");
  CHECK(defaults.train.pmnn.width == 256);
  CHECK(defaults.train.epochs == 500);
  CHECK(defaults.train.lambda_grid == LambdaGrid::equispaced(0.0, 1.0, 100));
  CHECK(defaults.train.alpha == 1.0);
  CHECK(defaults.pit_draws == 1000);
  CHECK(defaults.cde.b == 1000);

  const std::string text = config_to_json(defaults);
  for (const char* key : {"\"width\": 256", "\"epochs\": 500", "\"alpha\": 1.0", "\"pit_draws\": 1000", "\"b\": 1000",
                          "\"version\": 1"})
    CHECK(text.find(key) != std::string::npos);

  RunConfig c = tiny_config();
  c.mode = Mode::Report;
  c.sim = SimSpec{SimKind::Sim3, 300, 9};
  c.seed = 42;
  c.train.seed = 42;
  const RunConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.sim->kind == SimKind::Sim3);
  CHECK(back.train.lambda_grid == c.train.lambda_grid);

  CHECK(error_of([] { config_from_json("{\"trian\": {}}"); }).find("'trian'") != std::string::npos);
  CHECK(error_of([] { config_from_json("{\"model\": {\"widht\": 3}}"); }).find("'widht'") != std::string::npos);
  CHECK_THROWS(config_from_json("{\"split\": [0.5, 0.5, 0.5]}"));
  CHECK_THROWS(config_from_json("{\"mode\": \"report\"}"));  // report needs a simulated source
  CHECK_THROWS(config_from_json("{\"version\": 2}"));
  CHECK(config_from_json("{\"train\": {\"lambda_grid\": {\"lo\": 0, \"hi\": 2, \"count\": 3}}}").train.lambda_grid ==
        LambdaGrid::equispaced(0.0, 2.0, 3));
}

TEST_CASE("stage failures are tagged and leave a marker") {
  const auto dir = testing::scratch_dir("stage");
  try {
    run_stage("train", dir, [] { throw std::runtime_error("boom"); });
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "train");
    CHECK(std::string(e.what()) == "[train] boom");
  }
  CHECK(read_file(dir / kFailureMarker) == "train: boom\n");
}

TEST_CASE("simulate writes the data and a sidecar") {
  const auto dir = testing::scratch_dir("simulate");
  run_simulate(SimSpec{SimKind::Sim5, 100, 3}, dir);
  const Dataset d = load_csv(dir / "data.csv", "y");
  CHECK(d.n() == 100);
  CHECK(d.p() == 1);
  CHECK(read_file(dir / "data.json").find("\"sim\": \"5\"") != std::string::npos);
}

TEST_CASE("train, select, predict and evaluate through the stage functions") {
  const auto dir = testing::scratch_dir("stages");
  RunConfig c = tiny_config();
  const Dataset d = generate_data(SimSpec{SimKind::Sim5, 200, 1});
  const TrainOutcome t = run_train(d, c, dir);
  for (const char* f : {"checkpoint.json", "train_log.csv", "train.csv", "validation.csv", "test.csv"})
    CHECK(fs::exists(dir / f));
  const LambdaSelection s = run_select_lambda(t.model, t.parts.validation, c.pit_draws, c.seed, dir);
  CHECK(read_selection(dir / "selection.json") == s.lambda_star);
  run_predict(t.model, s.lambda_star, t.parts.test.x, c.cde, c.seed, dir / "cde");
  for (Eigen::Index i = 0; i < t.parts.test.n(); ++i)
    CHECK(fs::exists(dir / "cde" / ("cde_point_" + std::to_string(i) + ".csv")));
  const auto oracle = oracle_for(SimKind::Sim5);
  const Evaluation ev = run_evaluate(t.model, t.parts.test, s.lambda_star, oracle.get(), "5", c.cde, c.seed, dir);
  CHECK(std::isfinite(ev.metrics.pmse_mean));
  CHECK(ev.metrics.crossing_violations == 0);
  CHECK(ev.metrics.quantile_pmse.size() == 9);
  CHECK(std::isfinite(ev.metrics.quantile_pmse.at(0.5)));
  CHECK(fs::exists(dir / "metrics.csv"));
  const Evaluation blind = evaluate_model(t.model, t.parts.test, s.lambda_star, nullptr, c.cde, *std::make_unique<Rng>(1));
  CHECK(std::isnan(blind.metrics.pmse_mean));
}

TEST_CASE("points files with or without the target column") {
  const auto dir = testing::scratch_dir("points");
  write_file(dir / "with.csv", "x1,y,x2\n1,9,2\n3,9,4\n");
  write_file(dir / "without.csv", "x1,x2\n1,2\n3,4\n");
  const Matrix a = load_points(dir / "with.csv", "y");
  const Matrix b = load_points(dir / "without.csv", "y");
  CHECK(a == b);
  CHECK(a.rows() == 2);
  CHECK(a(1, 1) == 4.0);
}

TEST_CASE("command line surface") {
  const auto dir = testing::scratch_dir("cli");
  const std::string out = (dir / "sim").string();
  CHECK(run_cli("simulate --sim 5 --n 120 --seed 2 --out " + out) == 0);
  CHECK(load_csv(dir / "sim" / "data.csv", "y").n() == 120);

  write_file(dir / "cfg.json", config_to_json(tiny_config()));
  const std::string tr = (dir / "tr").string();
  CHECK(run_cli("train --data " + out + "/data.csv --config " + (dir / "cfg.json").string() + " --out " + tr) == 0);
  CHECK(run_cli("select-lambda --checkpoint " + tr + "/checkpoint.json --val " + tr + "/validation.csv --draws 20 --out " +
                tr) == 0);
  CHECK(run_cli("predict --checkpoint " + tr + "/checkpoint.json --lambda-star 0 --b 20 --points " + tr +
                "/test.csv --out " + tr + "/cde") == 0);
  CHECK(fs::exists(dir / "tr" / "cde" / "cde_point_0.csv"));
  CHECK(run_cli("evaluate --checkpoint " + tr + "/checkpoint.json --test " + tr + "/test.csv --oracle 5 --out " +
                (dir / "ev").string()) == 0);
  CHECK(fs::exists(dir / "ev" / "metrics.csv"));

  write_file(dir / "broken.json", "{\"model\": {\"depth\": 3}}");
  const std::string bad = (dir / "bad").string();
  CHECK(run_cli("train --data " + out + "/data.csv --config " + (dir / "broken.json").string() + " --out " + bad) != 0);
  CHECK(read_file(dir / "bad" / kFailureMarker).rfind("config:", 0) == 0);
  CHECK(run_cli("simulate --sim 9 --out " + bad) != 0);
}
