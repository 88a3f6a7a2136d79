#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fcs/experiment.hpp"

using namespace fcs;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fcs_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const char* kTwoQubitModel = R"({
  "h_a": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]],
  "h_b": [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]],
  "v":   [[0, 0, 0, 0.4], [0, 0, 0.4, 0], [0, 0.4, 0, 0], [0.4, 0, 0, 0]]
})";

std::string error_of(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config: minimal XY config uses documented defaults") {
  const auto cfg = parse_config("model:\n  type: xy_lattice\n  half_width: 1\n");
  const auto& xy = std::get<XYLatticeSpec>(cfg.model);
  CHECK(xy.half_width == 1);
  CHECK(xy.coupling == 1.0);
  CHECK(std::holds_alternative<MaximallyMixedState>(cfg.state));
  CHECK(cfg.t_values == std::vector<double>{0.1, 1.0, 10.0, 100.0, 1000.0});
  CHECK(cfg.alpha_m == 0.5);
  CHECK(cfg.s_points == 101);
  CHECK_FALSE(cfg.c.has_value());
  CHECK(cfg.output.formats == std::set<OutputFormat>{OutputFormat::csv});
}

TEST_CASE("config: full Anderson config") {
  const auto cfg = parse_config(R"(
model:
  type: anderson
  lead_length: 2
  dot_energy: 0.3
  interaction: 2.0
  lead_coupling_left: [[0.5, 0.1], 0.0]
  lead_coupling_right: [0.4, 0.2]
  include_dot_in_measured_energy: false
state: {type: pure_random, seed: 17}
t_values: [0, 2.5]
alpha_m: 1.0
epsilon: 0.25
C: 2
s_points: 51
tolerances: {cluster_tol: 1e-8, bin_tol: 1e-7}
output: {dir: results, formats: [csv, json]}
max_dim: 1024
)",
                                "/base");
  const auto& an = std::get<AndersonSpec>(cfg.model);
  CHECK(an.lead_length == 2);
  CHECK(an.lead_coupling_left[1][0] == Complex(0.5, 0.1));
  CHECK(an.lead_coupling_right[0][1] == Complex(0.2));
  CHECK_FALSE(an.include_dot_in_measured_energy);
  CHECK(std::get<PureRandomState>(cfg.state).seed == 17);
  CHECK(cfg.c == 2.0);
  CHECK(cfg.tolerances.bin_tol == 1e-7);
  CHECK(cfg.output.dir == fs::path("/base/results"));
  CHECK(cfg.max_dim == 1024);
}

TEST_CASE("config: validation and parse errors") {
  CHECK_THROWS_AS(parse_config("model: {type: xy_lattice}\nt_values: []\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("model: {type: xy_lattice}\nalpha_m: -1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("model: {type: xy_lattice}\nepsilon: 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("model: {type: xy_lattice}\ns_points: 100\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("model: {type: xy_lattice}\nt_values: [-1]\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("state: {type: maximally_mixed}\n"), ParseError);

  const auto unknown = error_of("model:\n  type: xy_lattice\n  half_widht: 2\n");
  CHECK(unknown.find("half_widht") != std::string::npos);
  CHECK(unknown.find("line 3") != std::string::npos);
  const auto bad_value = error_of("model: {type: xy_lattice}\nalpha_m: lots\n");
  CHECK(bad_value.find("alpha_m") != std::string::npos);
  CHECK(bad_value.find("line 2") != std::string::npos);
  CHECK(error_of("model: {type: cube}\n").find("cube") != std::string::npos);
  CHECK(error_of("model: [\n").find("line") != std::string::npos);
}

TEST_CASE("explicit model files") {
  const auto dir = scratch_dir("explicit");
  spill(dir / "m.json", kTwoQubitModel);
  const auto sys = load_explicit_model(dir / "m.json");
  CHECK(max_abs_diff(sys.h_v().matrix(), two_qubit_fixture(0.4).h_v().matrix()) == 0.0);
  spill(dir / "c.json", R"({"h_a": [[0, [0, 1]], [[0, -1], 0]], "h_b": [[0, 0], [0, 0]], "v": [[1, 0], [0, 1]]})");
  CHECK(load_explicit_model(dir / "c.json").h_a().matrix()(0, 1) == Complex(0, 1));
  spill(dir / "bad.json", R"({"h_a": [[1, 2], [3, 4]], "h_b": [[0, 0], [0, 0]], "v": [[0, 0], [0, 0]]})");
  CHECK_THROWS_AS(load_explicit_model(dir / "bad.json"), InvalidArgument);
  spill(dir / "missing.json", R"({"h_a": [[1]]})");
  CHECK_THROWS_AS(load_explicit_model(dir / "missing.json"), ParseError);
  CHECK_THROWS_AS(load_explicit_model(dir / "m.json", 2), SizeLimit);
}

TEST_CASE("run on a decoupled model gives a point mass at zero") {
  // Level pairs that carry no weight stay in the distribution as zero atoms.
  const auto dir = scratch_dir("decoupled");
  spill(dir / "m.json", R"({"h_a": [[1, 0], [0, -1]], "h_b": [[0, 0], [0, 0]], "v": [[0, 0], [0, 0]]})");
  spill(dir / "cfg.yaml", "model: {type: explicit, path: m.json}\nstate: {type: pure_random, seed: 3}\n"
                          "t_values: [0, 1, 10]\noutput: {dir: out}\n");
  const auto report = run_experiment(load_config(dir / "cfg.yaml"));
  CHECK(report.pass);
  REQUIRE(report.records.size() == 3);
  for (const auto& r : report.records) {
    CHECK(r.mean == 0.0);
    CHECK(r.tail_empirical <= 1e-15 + (r.t == 0.0 ? 1.0 : 0.0));
    CHECK(r.exp_moment == doctest::Approx(1.0).epsilon(1e-14));
  }
  const auto d = parse_distribution_csv(slurp(dir / "out" / "distribution_001.csv"));
  CHECK(d.prob_at(0.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("run matches direct library calls on the two-qubit fixture") {
  const auto dir = scratch_dir("direct");
  spill(dir / "m.json", kTwoQubitModel);
  ExperimentConfig cfg;
  cfg.model = ExplicitModel{dir / "m.json"};
  cfg.t_values = {0.5, 3.0};
  cfg.alpha_m = 1.0;
  cfg.epsilon = 0.5;
  cfg.c = 1.0;
  cfg.output.dir = dir / "out";
  const auto report = run_experiment(cfg, {1, false});
  const auto sys = two_qubit_fixture(0.4);
  const auto rho = DensityMatrix::maximally_mixed(4);
  const auto reg = compute_R(sys, 1.0, 101);
  CHECK(report.regularity.r_value == doctest::Approx(reg.r_value).epsilon(1e-14));
  for (const auto& rec : report.records) {
    const auto d = fcs_distribution(sys, rho, rec.t);
    const auto thm = verify_theorem(d, rec.t, 1.0, reg);
    CHECK(rec.exp_moment == doctest::Approx(thm.lhs).epsilon(1e-14));
    CHECK(rec.theorem_bound == doctest::Approx(thm.rhs).epsilon(1e-14));
    CHECK(rec.mean == doctest::Approx(moments(d, 1)).epsilon(1e-14));
    const auto tail = tail_bound_check(d, rec.t, 0.5, 1.0, reg.r_value);
    CHECK(rec.tail_empirical == doctest::Approx(tail.empirical).epsilon(1e-14));
    CHECK(rec.tail_bound == doctest::Approx(tail.bound).epsilon(1e-14));
    REQUIRE(rec.strong_tail.has_value());
    CHECK(rec.strong_tail->bound ==
          doctest::Approx(strong_tail_check(sys, d, rec.t, 0.5, 1.0).bound).epsilon(1e-12));
  }
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("runs are byte-reproducible across worker counts") {
  const auto dir = scratch_dir("repro");
  ExperimentConfig cfg;
  cfg.model = XYLatticeSpec{1, 1.0, 0.5, kDefaultMaxDim};
  cfg.state = GibbsProductState{0.2, 1.0};
  cfg.t_values = {0.1, 1.0, 10.0};
  cfg.c = 0.5;
  cfg.output.dir = dir;
  cfg.output.formats = {OutputFormat::csv, OutputFormat::json};
  const std::vector<std::string> files = {"report.csv", "report.json", "distribution_000.csv",
                                          "distribution_002.csv"};
  run_experiment(cfg, {1, true});
  std::vector<std::string> first;
  for (const auto& f : files) first.push_back(slurp(dir / f));
  run_experiment(cfg, {4, true});
  for (std::size_t k = 0; k < files.size(); ++k) CHECK(slurp(dir / files[k]) == first[k]);
}

TEST_CASE("run errors name their stage") {
  ExperimentConfig cfg;
  cfg.model = ExplicitModel{"/nonexistent/model.json"};
  cfg.t_values = {1.0};
  try {
    run_experiment(cfg, {1, false});
    FAIL("expected an error");
  } catch (const ExperimentError& e) {
    CHECK(e.stage() == "model");
  }
  cfg.t_values = {};
  try {
    run_experiment(cfg, {1, false});
    FAIL("expected an error");
  } catch (const ExperimentError& e) {
    CHECK(e.stage() == "config");
  }
}

TEST_CASE("distribution CSV format") {
  const FcsDistribution point({{0.0, 1.0}}, 0.0);
  CHECK(distribution_csv(point) == "delta_e,prob\n0.0000000000000000e+00,1.0000000000000000e+00\n");
  const FcsDistribution three({{-1.5, 0.2}, {0.0, 0.3}, {2.25, 0.5}}, 1e-9);
  const auto text = distribution_csv(three);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  const auto back = parse_distribution_csv(text, 1e-9);
  REQUIRE(back.size() == 3);
  double total = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(back.atoms()[k].delta_e == three.atoms()[k].delta_e);
    CHECK(back.atoms()[k].prob == three.atoms()[k].prob);
    total += back.atoms()[k].prob;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(parse_distribution_csv("dE,p\n0,1\n"), ParseError);
  CHECK_THROWS_AS(parse_distribution_csv("delta_e,prob\n0,x\n"), ParseError);
}

TEST_CASE("numbers survive a text round trip") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int k = 0; k < 200; ++k) {
    const double x = u(rng) * std::pow(10.0, k % 20 - 10);
    const double y = std::stod(format_number(x));
    CHECK(std::abs(y - x) <= 1e-15 * std::abs(x));
  }
}

TEST_CASE("report CSV and JSON") {
  const auto dir = scratch_dir("report");
  ExperimentConfig cfg;
  cfg.model = XYLatticeSpec{1, 1.0, 0.5, kDefaultMaxDim};
  cfg.t_values = {2.0};
  cfg.c = 1.0;
  cfg.output.dir = dir;
  const auto report = run_experiment(cfg, {1, false});
  const auto csv = report_csv(report);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.rfind("t,mean,mean_over_t,exp_moment,theorem_bound,theorem_pass,"
                  "tail_empirical,tail_bound,tail_pass\n",
                  0) == 0);
  CHECK(csv.find("True") == std::string::npos);
  CHECK(csv.find(",true,") != std::string::npos);

  const auto back = parse_report_json(report_json(report));
  CHECK(back.config == report.config);
  CHECK(back.model_label == report.model_label);
  CHECK(back.dim == report.dim);
  CHECK(back.regularity == report.regularity);
  CHECK(back.records == report.records);
  CHECK(back.pass == report.pass);
  bool all = true;
  for (const auto& r : report.records) all = all && r.pass;
  CHECK(report.pass == all);
  CHECK_THROWS_AS(parse_report_json("{}"), ParseError);
}

TEST_CASE("sweeps") {
  const auto dir = scratch_dir("sweep");
  ExperimentConfig cfg;
  cfg.model = XYLatticeSpec{1, 1.0, 0.5, kDefaultMaxDim};
  cfg.t_values = {1.0};
  cfg.output.dir = dir;
  const auto points = run_sweep(cfg, "alpha", {0.25, 0.5, 1.0}, {1, true});
  REQUIRE(points.size() == 3);
  CHECK(points[0].report.regularity.r_value < points[2].report.regularity.r_value);
  CHECK(fs::exists(dir / "sweep_alpha_002" / "report.csv"));
  const auto csv = sweep_csv("alpha", points);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK_THROWS_AS(run_sweep(cfg, "beta", {1.0}), ValidationError);
}
