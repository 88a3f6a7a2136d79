#pragma once

// Config-driven experiments: build a model and an initial state, evaluate the
// energy-variation statistics on a list of times, check every bound, and
// write CSV/JSON results.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "fcs/bounds.hpp"
#include "fcs/fcs.hpp"
#include "fcs/models.hpp"

namespace fcs {

/// Three matrices h_a, h_b, v stored in a JSON file; see README for the schema.
struct ExplicitModel {
  std::filesystem::path path;
  friend bool operator==(const ExplicitModel&, const ExplicitModel&) = default;
};

using ModelConfig = std::variant<XYLatticeSpec, AndersonSpec, ExplicitModel>;

struct GibbsProductState {
  double beta_a = 0.0;
  double beta_b = 0.0;
  friend bool operator==(const GibbsProductState&, const GibbsProductState&) = default;
};
struct MaximallyMixedState {
  friend bool operator==(const MaximallyMixedState&, const MaximallyMixedState&) = default;
};
struct PureRandomState {
  std::uint64_t seed = 0;
  friend bool operator==(const PureRandomState&, const PureRandomState&) = default;
};

using StateConfig = std::variant<GibbsProductState, MaximallyMixedState, PureRandomState>;

enum class OutputFormat { csv, json };

struct Tolerances {
  std::optional<double> cluster_tol;
  std::optional<double> bin_tol;
  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct OutputConfig {
  std::filesystem::path dir = "fcs_output";
  std::set<OutputFormat> formats = {OutputFormat::csv};
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ExperimentConfig {
  ModelConfig model = XYLatticeSpec{};
  StateConfig state = MaximallyMixedState{};
  std::vector<double> t_values;
  double alpha_m = 0.5;
  double epsilon = 0.5;
  std::optional<double> c;
  int s_points = kDefaultSPoints;
  Tolerances tolerances;
  OutputConfig output;
  std::size_t max_dim = kDefaultMaxDim;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ValidationError naming the violated invariant.
void validate(const ExperimentConfig& cfg);

/// Parses the YAML config schema. Relative paths (output.dir, explicit model
/// files) are resolved against base_dir. Throws ParseError (with line numbers
/// where available) or ValidationError.
ExperimentConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Reads an explicit model file (JSON with keys h_a, h_b, v).
PartitionedSystem load_explicit_model(const std::filesystem::path& path,
                                      std::size_t max_dim = kDefaultMaxDim);

PartitionedSystem build_model(const ModelConfig& model, std::size_t max_dim);
DensityMatrix build_state(const StateConfig& state, const PartitionedSystem& system);

struct RunRecord {
  double t = 0.0;
  std::size_t atom_count = 0;
  double max_abs_delta_e = 0.0;
  double mean = 0.0;
  double mean_over_t = 0.0;
  double exp_moment = 0.0;
  double theorem_bound = 0.0;
  bool theorem_pass = false;
  double tail_empirical = 0.0;
  double tail_bound = 0.0;
  bool tail_pass = false;
  std::optional<TailCheck> strong_tail;  // present when C is configured
  double heat_from_v = 0.0;
  double first_law_residual = 0.0;
  bool first_law_pass = false;
  bool pass = false;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct RunTimings {
  double setup_seconds = 0.0;
  double records_seconds = 0.0;
  double total_seconds = 0.0;
};

struct RunReport {
  ExperimentConfig config;
  std::string model_label;
  std::size_t dim = 0;
  RegularityReport regularity;
  std::vector<RunRecord> records;  // ordered as config.t_values
  bool pass = false;
  RunTimings timings;  // not serialized; outputs stay byte-reproducible
};

/// Raised by run_experiment; stage() names the pipeline step that failed.
class ExperimentError : public Error {
 public:
  ExperimentError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct RunOptions {
  /// 0 = hardware concurrency. The FCS_MAX_WORKERS environment variable
  /// caps the count either way.
  unsigned workers = 0;
  bool write_outputs = true;
};

RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Writes distribution_<k>.csv per time, report.csv and/or report.json into
/// the configured output directory.
void write_outputs(const RunReport& report,
                   const std::vector<FcsDistribution>& distributions);

// -- file formats -----------------------------------------------------------

/// Scientific notation with 17 significant digits.
std::string format_number(double x);

std::string distribution_csv(const FcsDistribution& d);
void emit_distribution(const FcsDistribution& d, const std::filesystem::path& path);
FcsDistribution parse_distribution_csv(const std::string& text, double bin_tol = 0.0);

std::string report_csv(const RunReport& r);
std::string report_json(const RunReport& r);
RunReport parse_report_json(const std::string& text);
void emit_report(const RunReport& r, const std::filesystem::path& path, OutputFormat format);

/// Grid overrides on top of a base config. param is "t", "alpha" or "C".
struct SweepPoint {
  double value;
  RunReport report;
};
std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, const std::string& param,
                                  const std::vector<double>& values,
                                  const RunOptions& options = {});
std::string sweep_csv(const std::string& param, const std::vector<SweepPoint>& points);

}  // namespace fcs
