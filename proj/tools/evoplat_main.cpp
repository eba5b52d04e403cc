#include <cstdint>
#include <string>

#include "CLI11.hpp"
#include "evoplat/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"evolving platformer agents (GA and NEAT)"};
  app.require_subcommand(1);

  evoplat::CliOptions train_options;
  CLI::App* train = app.add_subcommand("train", "run one experiment from a config");
  train->add_option("--config", train_options.config_path, "run config file (INI)")
      ->required();
  train->add_option("--out", train_options.out_dir,
                    "output directory (overrides [run] output_dir)");
  train->add_option("--seed-offset", train_options.seed_offset,
                    "value added to every seed");

  std::string replay_file, replay_level;
  CLI::App* replay = app.add_subcommand("replay", "re-simulate a stored replay");
  replay->add_option("replay", replay_file, "replay file")->required();
  replay->add_option("level", replay_level, "level file (overrides the header)");

  std::string compare_ga, compare_ne;
  evoplat::CliOptions compare_options;
  CLI::App* compare =
      app.add_subcommand("compare", "run a GA and an NE config on the same level");
  compare->add_option("ga_config", compare_ga, "config with algorithm = GA")
      ->required();
  compare->add_option("ne_config", compare_ne, "config with algorithm = NE")
      ->required();
  compare->add_option("--out", compare_options.out_dir, "directory for compare.csv");
  compare->add_option("--seed-offset", compare_options.seed_offset,
                      "value added to every seed");

  std::string make_out;
  long long make_width = 60, make_coins = 3, make_pipes = 2;
  std::uint64_t make_seed = 1;
  CLI::App* make = app.add_subcommand("make-level", "generate a flat test level");
  make->add_option("--out", make_out, "level file to write")->required();
  make->add_option("--width", make_width, "level width in tiles (>= 10)");
  make->add_option("--coins", make_coins, "number of coins");
  make->add_option("--pipes", make_pipes, "number of pipe obstacles");
  make->add_option("--seed", make_seed, "placement seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (train->parsed()) return evoplat::cmd_train(train_options);
  if (replay->parsed()) return evoplat::cmd_replay(replay_file, replay_level);
  if (compare->parsed())
    return evoplat::cmd_compare(compare_ga, compare_ne, compare_options);
  if (make->parsed())
    return evoplat::cmd_make_level(make_out, make_width, make_coins, make_pipes,
                                   make_seed);
  return 2;
}
