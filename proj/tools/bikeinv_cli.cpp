// bikeinv: forecast bike demand, choose starting inventories, evaluate.
//
//   bikeinv <ingest|train|forecast|optimize|evaluate|bias-study|pipeline>
//           --config PATH [--seed N] [--interval 15|30|60] [--out DIR] [--jobs N]

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>

#include "bikeinv/pipeline.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> interval;
  std::optional<std::string> out;
  int jobs = 1;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "run configuration (JSON)")->required();
  cmd->add_option("--seed", f.seed, "overrides the config seed");
  cmd->add_option("--interval", f.interval, "aggregation interval in minutes (15, 30 or 60)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--jobs", f.jobs, "worker cap")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace bikeinv;
  CLI::App app{"Station demand forecasting and inventory decisions"};
  app.require_subcommand(1);
  Flags flags;
  const std::map<std::string, std::function<void(const RunConfig&)>> stages{
      {"ingest", cmd_ingest},     {"train", cmd_train},           {"forecast", cmd_forecast},
      {"optimize", cmd_optimize}, {"evaluate", cmd_evaluate},     {"bias-study", cmd_bias_study},
      {"pipeline", run_pipeline}};
  for (const auto& [name, _] : stages) add_flags(app.add_subcommand(name), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    // Interval is checked before the config is read so a bad flag does no work.
    if (flags.interval) validate_interval(*flags.interval);
    auto config = RunConfig::load(flags.config);
    if (flags.seed) config.seed = *flags.seed;
    if (flags.interval) config.interval_minutes = *flags.interval;
    if (flags.out) config.out = *flags.out;
    config.validate();
    const auto* sub = app.get_subcommands().front();
    stages.at(sub->get_name())(config);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "bikeinv: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
