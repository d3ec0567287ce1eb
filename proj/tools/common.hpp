#pragma once

#include <atomic>
#include <csignal>
#include <thread>

namespace cloop::tools {

inline std::atomic<bool> g_shutdown{false};

inline void install_signal_handlers() {
  struct sigaction sa{};
  sa.sa_handler = [](int) { g_shutdown.store(true); };
  sigaction(SIGINT, &sa, nullptr);
  sigaction(SIGTERM, &sa, nullptr);
}

inline void wait_for_shutdown() {
  while (!g_shutdown.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

}  // namespace cloop::tools
