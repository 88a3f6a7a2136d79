#include "fcs/experiment.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace fcs {

using json = nlohmann::json;

namespace {

// -- YAML helpers -----------------------------------------------------------

std::string where(const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.line < 0) return "";
  return fmt::format(" (line {})", mark.line + 1);
}

template <class T>
T read_scalar(const YAML::Node& parent, const char* key, const std::string& path) {
  const YAML::Node node = parent[key];
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError(fmt::format("field '{}{}'{}: cannot read value '{}'", path, key, where(node),
                                 node.IsScalar() ? node.Scalar() : std::string("<non-scalar>")));
  }
}

template <class T>
T read_or(const YAML::Node& parent, const char* key, const std::string& path, T fallback) {
  if (!parent[key]) return fallback;
  return read_scalar<T>(parent, key, path);
}

void reject_unknown(const YAML::Node& map, std::initializer_list<const char*> allowed,
                    const std::string& path) {
  if (!map.IsMap()) throw ParseError(fmt::format("section '{}'{} must be a mapping", path, where(map)));
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ParseError(fmt::format("unknown field '{}{}'{}", path, key, where(kv.first)));
  }
}

Complex read_complex(const YAML::Node& node, const std::string& field) {
  try {
    if (node.IsSequence()) {
      if (node.size() != 2) throw ParseError("");
      return {node[0].as<double>(), node[1].as<double>()};
    }
    return {node.as<double>(), 0.0};
  } catch (const std::exception&) {
    throw ParseError(fmt::format("field '{}'{}: expected a number or [re, im]", field, where(node)));
  }
}

std::vector<Complex> read_coupling_list(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence())
    throw ParseError(fmt::format("field '{}'{}: expected a list", field, where(node)));
  std::vector<Complex> out;
  for (const auto& item : node) out.push_back(read_complex(item, field));
  return out;
}

ModelConfig parse_model(const YAML::Node& node, const std::filesystem::path& base_dir) {
  if (!node) throw ParseError("missing section 'model'");
  const auto type = read_scalar<std::string>(node, "type", "model.");
  if (type == "xy_lattice") {
    reject_unknown(node, {"type", "half_width", "coupling", "boundary_strength"}, "model.");
    XYLatticeSpec spec;
    spec.half_width = read_or<int>(node, "half_width", "model.", 1);
    spec.coupling = read_or<double>(node, "coupling", "model.", 1.0);
    spec.boundary_strength = read_or<double>(node, "boundary_strength", "model.", 0.5);
    return spec;
  }
  if (type == "anderson") {
    reject_unknown(node,
                   {"type", "lead_length", "dot_energy", "interaction", "coupling",
                    "lead_coupling_left", "lead_coupling_right", "include_dot_in_measured_energy"},
                   "model.");
    const int l = read_or<int>(node, "lead_length", "model.", 1);
    const Complex lambda = node["coupling"] ? read_complex(node["coupling"], "model.coupling")
                                            : Complex(0.5);
    AndersonSpec spec = AndersonSpec::with_nearest_site_coupling(
        l, read_or<double>(node, "dot_energy", "model.", 0.5),
        read_or<double>(node, "interaction", "model.", 1.0), lambda,
        read_or<bool>(node, "include_dot_in_measured_energy", "model.", true));
    if (node["lead_coupling_left"]) {
      const auto v = read_coupling_list(node["lead_coupling_left"], "model.lead_coupling_left");
      spec.lead_coupling_left = {v, v};
    }
    if (node["lead_coupling_right"]) {
      const auto v = read_coupling_list(node["lead_coupling_right"], "model.lead_coupling_right");
      spec.lead_coupling_right = {v, v};
    }
    return spec;
  }
  if (type == "explicit") {
    reject_unknown(node, {"type", "path"}, "model.");
    std::filesystem::path p = read_scalar<std::string>(node, "path", "model.");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return ExplicitModel{p};
  }
  throw ParseError(fmt::format("field 'model.type'{}: unknown model '{}' "
                               "(expected xy_lattice, anderson or explicit)",
                               where(node["type"]), type));
}

StateConfig parse_state(const YAML::Node& node) {
  if (!node) return MaximallyMixedState{};
  const auto type = read_scalar<std::string>(node, "type", "state.");
  if (type == "gibbs_product") {
    reject_unknown(node, {"type", "beta_a", "beta_b"}, "state.");
    return GibbsProductState{read_scalar<double>(node, "beta_a", "state."),
                             read_scalar<double>(node, "beta_b", "state.")};
  }
  if (type == "maximally_mixed") {
    reject_unknown(node, {"type"}, "state.");
    return MaximallyMixedState{};
  }
  if (type == "pure_random") {
    reject_unknown(node, {"type", "seed"}, "state.");
    return PureRandomState{read_or<std::uint64_t>(node, "seed", "state.", 0)};
  }
  throw ParseError(fmt::format("field 'state.type'{}: unknown state '{}' "
                               "(expected gibbs_product, maximally_mixed or pure_random)",
                               where(node["type"]), type));
}

// -- JSON helpers -----------------------------------------------------------

json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double to_number(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ParseError("expected a number, got '" + s + "'");
  }
  return j.get<double>();
}

json complex_json(Complex z) { return json::array({number(z.real()), number(z.imag())}); }

Complex complex_from_json(const json& j) {
  if (j.is_array()) {
    if (j.size() != 2) throw ParseError("complex entry must be [re, im]");
    return {to_number(j[0]), to_number(j[1])};
  }
  return {to_number(j), 0.0};
}

json coupling_json(const std::array<std::vector<Complex>, 2>& c) {
  json out = json::array();
  for (const auto& spin : c) {
    json row = json::array();
    for (const auto& z : spin) row.push_back(complex_json(z));
    out.push_back(row);
  }
  return out;
}

std::array<std::vector<Complex>, 2> coupling_from_json(const json& j) {
  std::array<std::vector<Complex>, 2> out;
  for (std::size_t s = 0; s < 2; ++s)
    for (const auto& z : j.at(s)) out[s].push_back(complex_from_json(z));
  return out;
}

json config_json(const ExperimentConfig& c) {
  json model;
  if (const auto* xy = std::get_if<XYLatticeSpec>(&c.model)) {
    model = {{"type", "xy_lattice"},
             {"half_width", xy->half_width},
             {"coupling", number(xy->coupling)},
             {"boundary_strength", number(xy->boundary_strength)}};
  } else if (const auto* an = std::get_if<AndersonSpec>(&c.model)) {
    model = {{"type", "anderson"},
             {"lead_length", an->lead_length},
             {"dot_energy", number(an->dot_energy)},
             {"interaction", number(an->interaction)},
             {"lead_coupling_left", coupling_json(an->lead_coupling_left)},
             {"lead_coupling_right", coupling_json(an->lead_coupling_right)},
             {"include_dot_in_measured_energy", an->include_dot_in_measured_energy}};
  } else {
    model = {{"type", "explicit"}, {"path", std::get<ExplicitModel>(c.model).path.string()}};
  }

  json state;
  if (const auto* g = std::get_if<GibbsProductState>(&c.state)) {
    state = {{"type", "gibbs_product"}, {"beta_a", number(g->beta_a)}, {"beta_b", number(g->beta_b)}};
  } else if (std::holds_alternative<MaximallyMixedState>(c.state)) {
    state = {{"type", "maximally_mixed"}};
  } else {
    state = {{"type", "pure_random"}, {"seed", std::get<PureRandomState>(c.state).seed}};
  }

  json ts = json::array();
  for (double t : c.t_values) ts.push_back(number(t));
  json formats = json::array();
  for (auto f : c.output.formats) formats.push_back(f == OutputFormat::csv ? "csv" : "json");
  json tol = json::object();
  if (c.tolerances.cluster_tol) tol["cluster_tol"] = number(*c.tolerances.cluster_tol);
  if (c.tolerances.bin_tol) tol["bin_tol"] = number(*c.tolerances.bin_tol);

  return {{"model", model},
          {"state", state},
          {"t_values", ts},
          {"alpha_m", number(c.alpha_m)},
          {"epsilon", number(c.epsilon)},
          {"C", c.c ? number(*c.c) : json(nullptr)},
          {"s_points", c.s_points},
          {"tolerances", tol},
          {"output", {{"dir", c.output.dir.string()}, {"formats", formats}}},
          {"max_dim", c.max_dim}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  const json& m = j.at("model");
  const auto type = m.at("type").get<std::string>();
  if (type == "xy_lattice") {
    XYLatticeSpec xy;
    xy.half_width = m.at("half_width").get<int>();
    xy.coupling = to_number(m.at("coupling"));
    xy.boundary_strength = to_number(m.at("boundary_strength"));
    c.model = xy;
  } else if (type == "anderson") {
    AndersonSpec an;
    an.lead_length = m.at("lead_length").get<int>();
    an.dot_energy = to_number(m.at("dot_energy"));
    an.interaction = to_number(m.at("interaction"));
    an.lead_coupling_left = coupling_from_json(m.at("lead_coupling_left"));
    an.lead_coupling_right = coupling_from_json(m.at("lead_coupling_right"));
    an.include_dot_in_measured_energy = m.at("include_dot_in_measured_energy").get<bool>();
    c.model = an;
  } else if (type == "explicit") {
    c.model = ExplicitModel{m.at("path").get<std::string>()};
  } else {
    throw ParseError("report: unknown model type '" + type + "'");
  }

  const json& s = j.at("state");
  const auto stype = s.at("type").get<std::string>();
  if (stype == "gibbs_product") {
    c.state = GibbsProductState{to_number(s.at("beta_a")), to_number(s.at("beta_b"))};
  } else if (stype == "maximally_mixed") {
    c.state = MaximallyMixedState{};
  } else if (stype == "pure_random") {
    c.state = PureRandomState{s.at("seed").get<std::uint64_t>()};
  } else {
    throw ParseError("report: unknown state type '" + stype + "'");
  }

  for (const auto& t : j.at("t_values")) c.t_values.push_back(to_number(t));
  c.alpha_m = to_number(j.at("alpha_m"));
  c.epsilon = to_number(j.at("epsilon"));
  if (!j.at("C").is_null()) c.c = to_number(j.at("C"));
  c.s_points = j.at("s_points").get<int>();
  const json& tol = j.at("tolerances");
  if (tol.contains("cluster_tol")) c.tolerances.cluster_tol = to_number(tol.at("cluster_tol"));
  if (tol.contains("bin_tol")) c.tolerances.bin_tol = to_number(tol.at("bin_tol"));
  c.output.dir = j.at("output").at("dir").get<std::string>();
  c.output.formats.clear();
  for (const auto& f : j.at("output").at("formats"))
    c.output.formats.insert(f.get<std::string>() == "csv" ? OutputFormat::csv : OutputFormat::json);
  c.max_dim = j.at("max_dim").get<std::size_t>();
  return c;
}

json tail_json(const TailCheck& t) {
  return {{"empirical", number(t.empirical)}, {"bound", number(t.bound)}, {"pass", t.pass}};
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << contents;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_double(const std::string& field, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size())
    throw ParseError(fmt::format("line {}: cannot parse number '{}'", line, field));
  return v;
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FCS_MAX_WORKERS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

}  // namespace

// ---------------------------------------------------------------------------

void validate(const ExperimentConfig& cfg) {
  if (cfg.t_values.empty()) throw ValidationError("t_values must be non-empty");
  for (double t : cfg.t_values)
    if (!(t >= 0.0) || !std::isfinite(t))
      throw ValidationError(fmt::format("t_values must be finite and >= 0 (got {})", t));
  if (!(cfg.alpha_m > 0.0) || !std::isfinite(cfg.alpha_m))
    throw ValidationError(fmt::format("alpha_m must be > 0 (got {})", cfg.alpha_m));
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon))
    throw ValidationError(fmt::format("epsilon must be > 0 (got {})", cfg.epsilon));
  if (cfg.c && (!(*cfg.c > 0.0) || !std::isfinite(*cfg.c)))
    throw ValidationError(fmt::format("C must be > 0 (got {})", *cfg.c));
  if (cfg.s_points < 3 || cfg.s_points % 2 == 0)
    throw ValidationError(fmt::format("s_points must be odd and >= 3 (got {})", cfg.s_points));
  if (cfg.tolerances.cluster_tol && !(*cfg.tolerances.cluster_tol > 0.0))
    throw ValidationError("tolerances.cluster_tol must be > 0");
  if (cfg.tolerances.bin_tol && !(*cfg.tolerances.bin_tol >= 0.0))
    throw ValidationError("tolerances.bin_tol must be >= 0");
  if (cfg.output.formats.empty()) throw ValidationError("output.formats must be non-empty");
  if (cfg.max_dim < 1) throw ValidationError("max_dim must be >= 1");
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(fmt::format("line {}: {}", e.mark.line + 1, e.msg));
  }
  if (!root.IsMap()) throw ParseError("config must be a mapping of fields");
  reject_unknown(root,
                 {"model", "state", "t_values", "alpha_m", "epsilon", "C", "s_points",
                  "tolerances", "output", "max_dim"},
                 "");

  ExperimentConfig cfg;
  cfg.model = parse_model(root["model"], base_dir);
  cfg.state = parse_state(root["state"]);
  if (root["t_values"]) {
    cfg.t_values = read_scalar<std::vector<double>>(root, "t_values", "");
  } else {
    cfg.t_values = {0.1, 1.0, 10.0, 100.0, 1000.0};
  }
  cfg.alpha_m = read_or<double>(root, "alpha_m", "", cfg.alpha_m);
  cfg.epsilon = read_or<double>(root, "epsilon", "", cfg.epsilon);
  if (root["C"] && !root["C"].IsNull()) cfg.c = read_scalar<double>(root, "C", "");
  cfg.s_points = read_or<int>(root, "s_points", "", cfg.s_points);
  cfg.max_dim = read_or<std::size_t>(root, "max_dim", "", cfg.max_dim);

  if (const YAML::Node tol = root["tolerances"]) {
    reject_unknown(tol, {"cluster_tol", "bin_tol"}, "tolerances.");
    if (tol["cluster_tol"]) cfg.tolerances.cluster_tol = read_scalar<double>(tol, "cluster_tol", "tolerances.");
    if (tol["bin_tol"]) cfg.tolerances.bin_tol = read_scalar<double>(tol, "bin_tol", "tolerances.");
  }
  if (const YAML::Node out = root["output"]) {
    reject_unknown(out, {"dir", "formats"}, "output.");
    if (out["dir"]) cfg.output.dir = read_scalar<std::string>(out, "dir", "output.");
    if (out["formats"]) {
      cfg.output.formats.clear();
      for (const auto& f : read_scalar<std::vector<std::string>>(out, "formats", "output.")) {
        if (f == "csv") {
          cfg.output.formats.insert(OutputFormat::csv);
        } else if (f == "json") {
          cfg.output.formats.insert(OutputFormat::json);
        } else {
          throw ParseError(fmt::format("field 'output.formats'{}: unknown format '{}'",
                                       where(out["formats"]), f));
        }
      }
    }
  }
  if (cfg.output.dir.is_relative() && !base_dir.empty()) cfg.output.dir = base_dir / cfg.output.dir;

  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_config(text, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

PartitionedSystem load_explicit_model(const std::filesystem::path& path, std::size_t max_dim) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  auto matrix = [&](const char* key) {
    if (!j.contains(key)) throw ParseError(path.string() + ": missing matrix '" + key + "'");
    const json& rows = j.at(key);
    const std::size_t n = rows.size();
    if (n == 0 || n > max_dim) {
      throw SizeLimit(fmt::format("{}: matrix '{}' has dimension {} (maximum {})", path.string(),
                                  key, n, max_dim));
    }
    std::vector<Complex> entries;
    entries.reserve(n * n);
    for (const auto& row : rows) {
      if (row.size() != n) throw ParseError(path.string() + ": matrix '" + key + "' is not square");
      for (const auto& z : row) entries.push_back(complex_from_json(z));
    }
    return HermitianOperator(ComplexMatrix(n, std::move(entries)));
  };
  return build_explicit(matrix("h_a"), matrix("h_b"), matrix("v"));
}

PartitionedSystem build_model(const ModelConfig& model, std::size_t max_dim) {
  if (const auto* xy = std::get_if<XYLatticeSpec>(&model)) {
    XYLatticeSpec spec = *xy;
    spec.max_dim = max_dim;
    return build_xy_lattice(spec);
  }
  if (const auto* an = std::get_if<AndersonSpec>(&model)) {
    AndersonSpec spec = *an;
    spec.max_dim = max_dim;
    return build_anderson(spec);
  }
  return load_explicit_model(std::get<ExplicitModel>(model).path, max_dim);
}

DensityMatrix build_state(const StateConfig& state, const PartitionedSystem& system) {
  if (const auto* g = std::get_if<GibbsProductState>(&state))
    return gibbs_product_state(system, g->beta_a, g->beta_b);
  if (std::holds_alternative<MaximallyMixedState>(state))
    return DensityMatrix::maximally_mixed(system.dim());
  return DensityMatrix::random_pure(system.dim(), std::get<PureRandomState>(state).seed);
}

// ---------------------------------------------------------------------------

RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const ExperimentError&) {
      throw;
    } catch (const Error& e) {
      throw ExperimentError(name, e.what());
    }
  };

  stage("config", [&] { validate(cfg); return 0; });
  const PartitionedSystem system = stage("model", [&] { return build_model(cfg.model, cfg.max_dim); });
  const DensityMatrix rho = stage("state", [&] { return build_state(cfg.state, system); });

  FcsOptions fopts;
  fopts.cluster_tol = cfg.tolerances.cluster_tol;
  fopts.bin_tol = cfg.tolerances.bin_tol;
  const TwoTimeMeasurement protocol =
      stage("fcs", [&] { return TwoTimeMeasurement(system, rho, fopts); });
  const DensityMatrix pinched = stage("fcs", [&] { return pinch(rho, protocol.decomposition()); });
  const EigenSystem hv_eigen = stage("fcs", [&] { return eigh(system.h_v()); });

  RunReport report;
  report.config = cfg;
  report.model_label = system.label();
  report.dim = system.dim();
  report.regularity =
      stage("regularity", [&] { return compute_R_refined(system, cfg.alpha_m, cfg.s_points); });
  std::optional<RegularityReport> strong_r;
  if (cfg.c) {
    strong_r = stage("regularity",
                     [&] { return compute_R(system, *cfg.c / cfg.epsilon, cfg.s_points); });
  }
  const auto setup_done = clock::now();

  const std::size_t n = cfg.t_values.size();
  std::vector<RunRecord> records(n);
  std::vector<std::optional<FcsDistribution>> distributions(n);
  std::vector<std::exception_ptr> errors(n);

  auto evaluate = [&](std::size_t k) {
    const double t = cfg.t_values[k];
    FcsDistribution d = protocol.distribution(t);
    RunRecord rec;
    rec.t = t;
    rec.atom_count = d.size();
    rec.max_abs_delta_e = d.max_abs_delta();
    rec.mean = moments(d, 1);
    rec.mean_over_t = t > 0.0 ? rec.mean / t : 0.0;

    const TheoremReport th = verify_theorem(d, t, cfg.alpha_m, report.regularity);
    rec.exp_moment = th.lhs;
    rec.theorem_bound = th.rhs;
    rec.theorem_pass = th.pass;

    // At t = 0 every atom satisfies |dE| >= t eps, and both bounds reduce to 2 e^R >= 2.
    auto tail = [&](double rate, double r) {
      if (t > 0.0) return tail_bound_check(d, t, cfg.epsilon, rate, r);
      return TailCheck{1.0, 2.0 * std::exp(r), true};
    };
    const TailCheck tc = tail(cfg.alpha_m, report.regularity.r_value);
    rec.tail_empirical = tc.empirical;
    rec.tail_bound = tc.bound;
    rec.tail_pass = tc.pass;
    if (strong_r) rec.strong_tail = tail(*cfg.c / cfg.epsilon, strong_r->r_value);

    const double heat = heat_from_interaction(system.v(), hv_eigen, pinched, t);
    const FirstLawReport fl = compare_first_law(t, rec.mean, heat);
    rec.heat_from_v = fl.heat_from_v;
    rec.first_law_residual = fl.residual;
    rec.first_law_pass = fl.pass;

    rec.pass = rec.theorem_pass && rec.tail_pass && rec.first_law_pass &&
               (!rec.strong_tail || rec.strong_tail->pass);
    records[k] = rec;
    distributions[k] = std::move(d);
  };

  const unsigned workers = worker_count(options.workers, n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        evaluate(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (errors[k]) {
      stage("records", [&]() -> int { std::rethrow_exception(errors[k]); });
    }
  }

  report.records = std::move(records);
  report.pass = std::all_of(report.records.begin(), report.records.end(),
                            [](const RunRecord& r) { return r.pass; });

  if (options.write_outputs) {
    std::vector<FcsDistribution> ds;
    ds.reserve(n);
    for (auto& d : distributions) ds.push_back(std::move(*d));
    stage("output", [&] { write_outputs(report, ds); return 0; });
  }

  const auto end = clock::now();
  report.timings.setup_seconds = std::chrono::duration<double>(setup_done - start).count();
  report.timings.records_seconds = std::chrono::duration<double>(end - setup_done).count();
  report.timings.total_seconds = std::chrono::duration<double>(end - start).count();
  return report;
}

void write_outputs(const RunReport& report, const std::vector<FcsDistribution>& distributions) {
  const auto& out = report.config.output;
  std::error_code ec;
  std::filesystem::create_directories(out.dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out.dir.string() + "': " + ec.message());
  if (out.formats.contains(OutputFormat::csv)) {
    emit_report(report, out.dir / "report.csv", OutputFormat::csv);
    for (std::size_t k = 0; k < distributions.size(); ++k)
      emit_distribution(distributions[k], out.dir / fmt::format("distribution_{:03}.csv", k));
  }
  if (out.formats.contains(OutputFormat::json))
    emit_report(report, out.dir / "report.json", OutputFormat::json);
}

// ---------------------------------------------------------------------------

std::string format_number(double x) { return fmt::format("{:.16e}", x); }

std::string distribution_csv(const FcsDistribution& d) {
  std::string s = "delta_e,prob\n";
  for (const auto& a : d.atoms())
    s += format_number(a.delta_e) + "," + format_number(a.prob) + "\n";
  return s;
}

void emit_distribution(const FcsDistribution& d, const std::filesystem::path& path) {
  write_file(path, distribution_csv(d));
}

FcsDistribution parse_distribution_csv(const std::string& text, double bin_tol) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "delta_e,prob")
    throw ParseError("distribution CSV: expected header 'delta_e,prob'");
  std::vector<FcsAtom> atoms;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError(fmt::format("line {}: expected two comma-separated fields", lineno));
    atoms.push_back({parse_double(line.substr(0, comma), lineno),
                     parse_double(line.substr(comma + 1), lineno)});
  }
  try {
    return FcsDistribution(std::move(atoms), bin_tol);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("distribution CSV: ") + e.what());
  }
}

namespace {

constexpr const char* kReportHeader =
    "t,mean,mean_over_t,exp_moment,theorem_bound,theorem_pass,tail_empirical,tail_bound,tail_pass";

std::string record_row(const RunRecord& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{}", format_number(r.t), format_number(r.mean),
                     format_number(r.mean_over_t), format_number(r.exp_moment),
                     format_number(r.theorem_bound), r.theorem_pass ? "true" : "false",
                     format_number(r.tail_empirical), format_number(r.tail_bound),
                     r.tail_pass ? "true" : "false");
}

}  // namespace

std::string report_csv(const RunReport& r) {
  std::string s = std::string(kReportHeader) + "\n";
  for (const auto& rec : r.records) s += record_row(rec) + "\n";
  return s;
}

std::string report_json(const RunReport& r) {
  json records = json::array();
  for (const auto& rec : r.records) {
    records.push_back({{"t", number(rec.t)},
                       {"atom_count", rec.atom_count},
                       {"max_abs_delta_e", number(rec.max_abs_delta_e)},
                       {"mean", number(rec.mean)},
                       {"mean_over_t", number(rec.mean_over_t)},
                       {"exp_moment", number(rec.exp_moment)},
                       {"theorem_bound", number(rec.theorem_bound)},
                       {"theorem_pass", rec.theorem_pass},
                       {"tail_empirical", number(rec.tail_empirical)},
                       {"tail_bound", number(rec.tail_bound)},
                       {"tail_pass", rec.tail_pass},
                       {"strong_tail", rec.strong_tail ? tail_json(*rec.strong_tail) : json(nullptr)},
                       {"heat_from_v", number(rec.heat_from_v)},
                       {"first_law_residual", number(rec.first_law_residual)},
                       {"first_law_pass", rec.first_law_pass},
                       {"pass", rec.pass}});
  }
  const auto& g = r.regularity;
  json j = {{"config", config_json(r.config)},
            {"model_label", r.model_label},
            {"dim", r.dim},
            {"regularity",
             {{"alpha", number(g.alpha)},
              {"r_value", number(g.r_value)},
              {"s_grid_points", g.s_grid_points},
              {"argmax_s", number(g.argmax_s)},
              {"refinement_change", number(g.refinement_change)}}},
            {"records", records},
            {"pass", r.pass}};
  return j.dump(2) + "\n";
}

RunReport parse_report_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    RunReport r;
    r.config = config_from_json(j.at("config"));
    r.model_label = j.at("model_label").get<std::string>();
    r.dim = j.at("dim").get<std::size_t>();
    const json& g = j.at("regularity");
    r.regularity.alpha = to_number(g.at("alpha"));
    r.regularity.r_value = to_number(g.at("r_value"));
    r.regularity.s_grid_points = g.at("s_grid_points").get<int>();
    r.regularity.argmax_s = to_number(g.at("argmax_s"));
    r.regularity.refinement_change = to_number(g.at("refinement_change"));
    for (const auto& x : j.at("records")) {
      RunRecord rec;
      rec.t = to_number(x.at("t"));
      rec.atom_count = x.at("atom_count").get<std::size_t>();
      rec.max_abs_delta_e = to_number(x.at("max_abs_delta_e"));
      rec.mean = to_number(x.at("mean"));
      rec.mean_over_t = to_number(x.at("mean_over_t"));
      rec.exp_moment = to_number(x.at("exp_moment"));
      rec.theorem_bound = to_number(x.at("theorem_bound"));
      rec.theorem_pass = x.at("theorem_pass").get<bool>();
      rec.tail_empirical = to_number(x.at("tail_empirical"));
      rec.tail_bound = to_number(x.at("tail_bound"));
      rec.tail_pass = x.at("tail_pass").get<bool>();
      if (!x.at("strong_tail").is_null()) {
        const json& st = x.at("strong_tail");
        rec.strong_tail = TailCheck{to_number(st.at("empirical")), to_number(st.at("bound")),
                                    st.at("pass").get<bool>()};
      }
      rec.heat_from_v = to_number(x.at("heat_from_v"));
      rec.first_law_residual = to_number(x.at("first_law_residual"));
      rec.first_law_pass = x.at("first_law_pass").get<bool>();
      rec.pass = x.at("pass").get<bool>();
      r.records.push_back(rec);
    }
    r.pass = j.at("pass").get<bool>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report JSON: ") + e.what());
  }
}

void emit_report(const RunReport& r, const std::filesystem::path& path, OutputFormat format) {
  write_file(path, format == OutputFormat::csv ? report_csv(r) : report_json(r));
}

// ---------------------------------------------------------------------------

std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, const std::string& param,
                                  const std::vector<double>& values, const RunOptions& options) {
  if (param != "t" && param != "alpha" && param != "C")
    throw ValidationError("sweep: param must be t, alpha or C (got '" + param + "')");
  if (values.empty()) throw ValidationError("sweep: no values given");
  std::vector<SweepPoint> points;
  for (std::size_t k = 0; k < values.size(); ++k) {
    ExperimentConfig cfg = base;
    const double v = values[k];
    if (param == "t") {
      cfg.t_values = {v};
    } else if (param == "alpha") {
      cfg.alpha_m = v;
    } else {
      cfg.c = v;
    }
    cfg.output.dir = base.output.dir / fmt::format("sweep_{}_{:03}", param, k);
    points.push_back({v, run_experiment(cfg, options)});
  }
  return points;
}

std::string sweep_csv(const std::string& param, const std::vector<SweepPoint>& points) {
  std::string s = std::string("param,value,") + kReportHeader + ",pass\n";
  for (const auto& p : points)
    for (const auto& rec : p.report.records)
      s += fmt::format("{},{},{},{}\n", param, format_number(p.value), record_row(rec),
                       rec.pass ? "true" : "false");
  return s;
}

}  // namespace fcs
