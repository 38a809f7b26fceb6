#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acarec/cli/pipeline.hpp"

using namespace acarec;

namespace {

std::string one_line(std::string s) {
  for (auto& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Artist-aware cold-start track recommendation pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file, output;
  std::vector<std::string> overrides;
  std::vector<std::uint64_t> seeds;
  bool print_config = false;
  app.add_option("-c,--config", config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("-o,--out", output, "output directory (paths.output)");
  app.add_option("--set", overrides, "override a config value, e.g. --set cf.dim=64")->take_all();
  app.add_option("--seeds", seeds, "seeds for cold-start training and evaluation")->delimiter(',');
  app.add_flag("--print-config", print_config, "print the effective config before running");

  auto* gen = app.add_subcommand("gen-synth", "generate a synthetic dataset");
  std::uint64_t synth_seed = 0;
  auto* synth_seed_opt = gen->add_option("--seed", synth_seed, "generator seed (synth.seed)");

  app.add_subcommand("split", "build the hot/cold bundle and print split statistics");
  app.add_subcommand("train-cf", "train BPR embeddings on the hot items");

  auto* train = app.add_subcommand("train-cold", "train a cold-start model for every seed");
  std::string train_method = "acarec";
  train->add_option("-m,--method", train_method, "acarec, deepmusic or deepmusic+am");

  auto* ev = app.add_subcommand("eval", "evaluate cold-start methods on the test split");
  std::vector<std::string> eval_methods;
  std::string context;
  ev->add_option("-m,--method", eval_methods, "method(s) to evaluate, or 'all'")->required();
  ev->add_option("--context", context, "inference context: full or a TopN size (eval.context)");

  app.add_subcommand("ablate", "train and evaluate the seven ablation configurations");
  app.add_subcommand("sweep-context", "vary the training and inference context size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "config_error " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    cli::json doc = config_file.empty() ? cli::json::object() : cli::read_config_file(config_file);
    if (!output.empty()) cli::apply_override(doc, "paths.output=" + cli::json(output).dump());
    if (*synth_seed_opt) cli::apply_override(doc, "synth.seed=" + std::to_string(synth_seed));
    if (!context.empty()) cli::apply_override(doc, "eval.context=" + (context == "full" ? std::string("0") : context));
    if (!seeds.empty()) doc["seeds"] = seeds;
    for (const auto& o : overrides) cli::apply_override(doc, o);
    const auto config = cli::config_from_json(doc);
    if (print_config) std::cout << cli::dump(cli::to_json(config));

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "gen-synth") cli::gen_synth(config, std::cout);
    else if (cmd == "split") cli::split(config, std::cout);
    else if (cmd == "train-cf") cli::train_cf(config, std::cout);
    else if (cmd == "train-cold") cli::train_cold(config, train_method, std::cout);
    else if (cmd == "eval") {
      if (eval_methods.size() == 1 && eval_methods.front() == "all") eval_methods = cli::eval_methods();
      cli::evaluate_methods(config, eval_methods, std::cout);
    } else if (cmd == "ablate") cli::ablate(config, std::cout);
    else if (cmd == "sweep-context") cli::sweep_context(config, std::cout);
  } catch (const Error& e) {
    std::cerr << to_string(e.kind()) << " " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
