#pragma once

#include "iflab/numerics.hpp"
#include "iflab/rng.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace iflab {

enum class Experiment { gap_sweep, bound_check, uncoded_pe, dof_scan, rateless };
enum class ChannelModel { rayleigh, fixed_file, diagonal };

Experiment experiment_from_string(const std::string& name);
std::string to_string(Experiment e);
ChannelModel channel_model_from_string(const std::string& name);
std::string to_string(ChannelModel m);

struct SimConfig {
  Experiment experiment = Experiment::bound_check;
  ChannelModel channel_model = ChannelModel::rayleigh;
  int M = 2;
  int N = 2;
  std::vector<double> snr_grid;
  long trials = 1;
  std::uint64_t seed = 0;
  std::string precoder = "builtin-golden";  // or a precoder file path
  int q = 4;               // uncoded-pe PAM size
  double rate_bits = 4.0;  // rateless target rate R
  std::string channel_file;  // fixed-file model input
  std::string out_path = "results.csv";
  int workers = 1;
};

/// Reads a config JSON object; unknown keys are rejected so typos fail loud.
SimConfig parse_config(const nlohmann::json& j);
SimConfig parse_config_file(const std::string& path);

/// One row of the results CSV. Fields that an experiment does not populate
/// stay NaN and serialize as empty cells.
struct TrialRecord {
  long trial = 0;
  double snr = 0.0;
  std::string channel_digest;
  double c_wi = nan_value();
  double capacity = nan_value();
  double snr_eff = nan_value();
  double bound_thm2 = nan_value();
  double bound_lemma2 = nan_value();
  double r_if = nan_value();
  double r_if_qary = nan_value();
  double r_pif = nan_value();
  double gamma = nan_value();
  double empirical_pe = nan_value();
  double analytic_pe_bound = nan_value();
  std::string flags;

  bool violation = false;
  std::string violation_reason;

  static double nan_value();
};

/// Checks every dominance relation the populated fields of a record must
/// satisfy; on failure marks the record VIOLATION with a reason.
void check_record_invariants(TrialRecord& rec, long trials_for_margin);

/// Draws a channel: rayleigh = i.i.d. unit-variance circularly symmetric
/// complex Gaussian entries; diagonal = real diagonal of i.i.d. Rayleigh
/// magnitudes with unit second moment; fixed_file returns *fixed unchanged
/// (the stream is not consumed).
ComplexMatrix channel_sample(ChannelModel model, int m, int n, TrialRng& substream,
                             const ComplexMatrix* fixed = nullptr);

struct RunResult {
  std::vector<TrialRecord> records;
  nlohmann::ordered_json summary;
  bool violation = false;
  std::string violation_reason;
  std::optional<ComplexMatrix> violation_channel;
};

/// Executes the configured experiment over snr_grid x trials, writes the CSV
/// at cfg.out_path plus a JSON summary alongside it, and reports whether any
/// record violated its invariants (violations are fatal to the run).
RunResult run_experiment(const SimConfig& cfg);

/// FNV-1a over the raw entry bytes, row-major, as a 16-digit hex string.
std::string channel_digest(const ComplexMatrix& h);

std::string csv_path(const SimConfig& cfg);
std::string summary_path(const SimConfig& cfg);

}  // namespace iflab
