// tickx: generate a synthetic corpus, train, extract and evaluate.
#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "tickx/errors.h"
#include "tickx/pipeline.h"

namespace {

tickx::PipelineConfig load(const std::string &path, std::optional<std::uint64_t> seed) {
  auto config = path.empty() ? tickx::PipelineConfig{} : tickx::load_pipeline_config(path);
  if (seed) config.set_seed(*seed);
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Extract time-series readings from financial text"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "key = value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "override the configured seed");

  auto *generate = app.add_subcommand("generate", "write a synthetic corpus and store");
  auto *train = app.add_subcommand("train", "train the network and the fusion classifier");
  auto *extract = app.add_subcommand("extract", "run the pipeline over a document file");
  auto *evaluate = app.add_subcommand("evaluate", "score the held-out test split");

  std::string input, output;
  extract->add_option("--input", input, "documents as JSON lines")
      ->required()
      ->check(CLI::ExistingFile);
  extract->add_option("--output", output, "accepted extractions (default: extractions_path)");

  // Options may follow the subcommand as well.
  for (auto *sub : {generate, train, extract, evaluate}) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = load(config_path, seed);
    if (generate->parsed()) {
      const auto st = tickx::cmd_generate(config);
      std::printf(
          "documents %zu  abs %zu  rel %zu  ambiguous %zu  distractors/doc %.3f  "
          "perturbed %zu/%zu\n",
          st.documents, st.tick_abs, st.tick_rel, st.ambiguous_documents,
          st.distractor_density, st.perturbed_points, st.total_points);
    } else if (train->parsed()) {
      std::cout << tickx::cmd_train(config).to_json().dump(2) << "\n";
    } else if (extract->parsed()) {
      const auto n =
          tickx::cmd_extract(config, input, output.empty() ? config.extractions_path : std::filesystem::path(output));
      std::printf("accepted %zu\n", n);
    } else if (evaluate->parsed()) {
      std::cout << tickx::cmd_evaluate(config).to_json().dump(2) << "\n";
    }
  } catch (const tickx::Error &e) {
    std::cerr << "tickx: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
