// SMF daemon: NWDAF analytics consumer that releases PDU sessions of
// flagged UEs through the UPF control endpoint.

#include <cstdio>

#include <CLI11.hpp>

#include "cloop/smf/smf.hpp"
#include "common.hpp"

int main(int argc, char** argv) {
  CLI::App app{"session management function extension"};
  std::string configPath;
  app.add_option("--config", configPath, "smf.toml")->required();
  CLI11_PARSE(app, argc, argv);

  cloop::smf::SmfConfig cfg;
  try {
    cfg = cloop::smf::load_smf_config(configPath);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "smfd: %s\n", e.what());
    return 1;
  }

  cloop::tools::install_signal_handlers();
  cloop::smf::SmfService service(cfg);
  if (!service.start()) {
    std::fprintf(stderr, "smfd: failed to start on %s\n", cfg.listenAddr.c_str());
    return 1;
  }
  std::printf("READY port=%d\n", service.port());
  std::fflush(stdout);
  cloop::tools::wait_for_shutdown();
  service.stop();
  return 0;
}
