// Model provisioning service and trainer CLI.
//
//   mlprov serve --config mlprov.toml
//   mlprov train --data features.csv --trees N --max-depth D --seed S --out model.json

#include <cstdio>
#include <fstream>

#include <CLI11.hpp>

#include "cloop/mlprov/dataset.hpp"
#include "cloop/mlprov/service.hpp"
#include "common.hpp"

namespace {

int run_serve(const std::string& configPath) {
  cloop::mlprov::MlServiceConfig cfg;
  try {
    cfg = cloop::mlprov::load_mlprov_config(configPath);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mlprov: %s\n", e.what());
    return 1;
  }
  cloop::tools::install_signal_handlers();
  cloop::mlprov::MlProvisionService service(cfg);
  if (!service.start()) {
    std::fprintf(stderr, "mlprov: failed to start on %s\n", cfg.listenAddr.c_str());
    return 1;
  }
  std::printf("READY port=%d registry=%s\n", service.port(), cfg.registryDir.c_str());
  std::fflush(stdout);
  cloop::tools::wait_for_shutdown();
  service.stop();
  return 0;
}

int run_train(const std::string& dataPath, int trees, int maxDepth, uint64_t seed,
              const std::string& outPath, double holdout) {
  using namespace cloop::mlprov;
  Dataset all;
  try {
    all = read_features_csv(dataPath);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mlprov train: %s\n", e.what());
    return 1;
  }
  if (all.rows.empty()) {
    std::fprintf(stderr, "mlprov train: %s has no rows\n", dataPath.c_str());
    return 1;
  }

  Dataset train = all, test;
  if (holdout > 0) {
    train = Dataset{};
    split_dataset(all, holdout, seed, &train, &test);
  }

  ModelDescriptor d;
  d.name = "bot-rf";
  d.eventId = "ABNORMAL_BEHAVIOUR";
  d.featureSchema = graph_feature_schema();
  TrainReport report;
  ForestModel model = train_forest(train, TrainParams{trees, maxDepth, seed}, d, &report);
  if (report.degenerate) {
    std::fprintf(stderr, "mlprov train: single-class input, trained a constant predictor\n");
  }
  if (!test.rows.empty()) {
    model.descriptor.metrics["holdoutAccuracy"] = evaluate_accuracy(model, test);
  }

  std::ofstream out(outPath, std::ios::trunc);
  if (!out) {
    std::fprintf(stderr, "mlprov train: cannot write %s\n", outPath.c_str());
    return 1;
  }
  out << forest_to_json(model);
  std::printf("trained %d trees (depth <= %d) on %zu rows; train accuracy %.4f", trees, maxDepth,
              train.rows.size(), report.trainAccuracy);
  if (!test.rows.empty()) {
    std::printf("; holdout accuracy %.4f on %zu rows", model.descriptor.metrics["holdoutAccuracy"],
                test.rows.size());
  }
  std::printf("\nwrote %s\n", outPath.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ML model provisioning service and trainer"};
  app.require_subcommand(1);

  auto* serve = app.add_subcommand("serve", "run the provisioning service");
  std::string configPath;
  serve->add_option("--config", configPath, "mlprov.toml")->required();

  auto* train = app.add_subcommand("train", "train a random forest from a feature CSV");
  std::string dataPath, outPath = "model.json";
  int trees = 100, maxDepth = 10;
  uint64_t seed = 1;
  double holdout = 0.0;
  train->add_option("--data", dataPath, "features.csv")->required();
  train->add_option("--trees", trees, "number of trees");
  train->add_option("--max-depth", maxDepth, "depth limit");
  train->add_option("--seed", seed, "training seed");
  train->add_option("--out", outPath, "output model path");
  train->add_option("--holdout", holdout, "holdout fraction for reported accuracy (0 = none)");

  CLI11_PARSE(app, argc, argv);
  if (serve->parsed()) return run_serve(configPath);
  return run_train(dataPath, trees, maxDepth, seed, outPath, holdout);
}
