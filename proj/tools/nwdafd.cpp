// NWDAF daemon: UPF data collection, report store, bot-detection engine and
// the analytics subscription service.

#include <cstdio>

#include <CLI11.hpp>

#include "cloop/engine/engine.hpp"
#include "cloop/nwdaf/service.hpp"
#include "common.hpp"

int main(int argc, char** argv) {
  CLI::App app{"network data analytics function"};
  std::string configPath;
  double threshold = 0.5;
  app.add_option("--config", configPath, "nwdaf.toml")->required();
  app.add_option("--threshold", threshold, "anomaly vote-share threshold");
  CLI11_PARSE(app, argc, argv);

  cloop::nwdaf::NwdafConfig cfg;
  try {
    cfg = cloop::nwdaf::load_nwdaf_config(configPath);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "nwdafd: %s\n", e.what());
    return 1;
  }

  cloop::tools::install_signal_handlers();
  cloop::nwdaf::NwdafService service(cfg);
  cloop::engine::BotEngineConfig engineCfg;
  engineCfg.decisionThreshold = threshold;
  cloop::engine::BotDetectionEngine engine(&service.store(), engineCfg);
  service.set_engine(cloop::nwdaf::AnalyticsEventId::AbnormalBehaviour, &engine);
  service.set_model_update_handler(
      [&engine](const cloop::nwdaf::ModelEndpoint& ep) { engine.set_model_endpoint(ep); });
  service.set_detection_log_provider([&engine] { return engine.detection_log_json(); });

  if (!service.start()) {
    std::fprintf(stderr, "nwdafd: failed to start on %s\n", cfg.listenAddr.c_str());
    return 1;
  }
  std::printf("READY port=%d\n", service.port());
  std::fflush(stdout);
  cloop::tools::wait_for_shutdown();
  service.stop();
  return 0;
}
