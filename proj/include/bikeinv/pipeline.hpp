#ifndef BIKEINV_PIPELINE_HPP
#define BIKEINV_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bikeinv/inventory.hpp"
#include "bikeinv/recurrent.hpp"

namespace bikeinv {

/// Model names accepted in the config, in report order.
const std::vector<std::string>& known_models();

/// A run configuration, read from a JSON document. Data paths are relative
/// to the config file; the output directory is relative to the working
/// directory.
struct RunConfig {
  std::filesystem::path base_dir = ".";
  std::filesystem::path trips, weather, stations;  // as written in the config
  bool synthetic = false;  // generate the corpus into <out>/synthetic first
  int interval_minutes = 60;
  Date period_start{std::chrono::year{2018} / std::chrono::January / 1};
  std::vector<StationId> station_ids;  // explicit selection
  int top_n = 3;                       // used when station_ids is empty
  std::vector<std::string> models;
  TrainOptions train;
  int ma_window_days = 30;
  int predict_samples = 100;
  int is_samples = 30;
  PenaltyConfig penalties;
  TransientOptions transient;
  double bias_delta_max = 25.0;
  double bias_delta_step = 0.5;
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";

  /// Throws ConfigError on unknown keys, bad values or a missing seed.
  static RunConfig parse(const std::string& json_text, const std::filesystem::path& base_dir = ".");
  static RunConfig load(const std::filesystem::path& path);

  std::filesystem::path resolve(const std::filesystem::path& p) const;

  /// Canonical JSON of the effective settings, excluding the output and base
  /// directories; hashed into every artifact.
  std::string canonical() const;
  std::string hash() const;
  void validate() const;
};

/// Stage seed derived from the config seed and a stage label.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& label);

// Stages. Each reads the previous stage's files under config.out and throws
// DataError naming the expected file when one is missing.
void cmd_ingest(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_forecast(const RunConfig& config);
void cmd_optimize(const RunConfig& config);
void cmd_evaluate(const RunConfig& config);
void cmd_bias_study(const RunConfig& config);
void run_pipeline(const RunConfig& config);

/// Maps the failure categories onto process exit codes: 1 usage and
/// configuration, 2 data, 3 numeric or training.
int exit_code_for(const std::exception& e);

}  // namespace bikeinv

#endif  // BIKEINV_PIPELINE_HPP
