// Simulated UPF daemon: EES + N4 control over HTTP, packet-descriptor
// ingestion over a local TCP socket.

#include <cstdio>

#include <CLI11.hpp>

#include "cloop/upf/service.hpp"
#include "common.hpp"

int main(int argc, char** argv) {
  CLI::App app{"simulated user plane function with event exposure"};
  std::string configPath;
  app.add_option("--config", configPath, "upf.toml")->required();
  CLI11_PARSE(app, argc, argv);

  cloop::upf::UpfServiceConfig cfg;
  try {
    cfg = cloop::upf::load_upf_config(configPath);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "upfd: %s\n", e.what());
    return 1;
  }

  cloop::tools::install_signal_handlers();
  cloop::upf::UpfService service(cfg);
  if (!service.start()) {
    std::fprintf(stderr, "upfd: failed to start on %s\n", cfg.listenAddr.c_str());
    return 1;
  }
  std::printf("READY ee_port=%d ingest_port=%d\n", service.ee_port(), service.ingest_port());
  std::fflush(stdout);
  cloop::tools::wait_for_shutdown();
  service.stop();
  return 0;
}
