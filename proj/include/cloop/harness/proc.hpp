#pragma once

#include <string>
#include <vector>

#include <sys/types.h>

namespace cloop::harness {

/// fork+exec with stdout/stderr inherited; returns -1 on failure.
pid_t spawn_process(const std::vector<std::string>& argv);

/// SIGTERM, then SIGKILL after gracePeriod; reaps the child.
void terminate_process(pid_t pid, double gracePeriodSeconds = 2.0);

/// Directory containing the running executable (via /proc/self/exe).
std::string self_exe_dir();

/// Polls GET <baseUri>/healthz until 200 or the deadline; true on success.
bool wait_http_ready(const std::string& baseUri, double timeoutSeconds);

}  // namespace cloop::harness
