#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cloop::util {

// Length-prefixed frames: 4-byte big-endian payload length, then payload.
// Used on the UPF packet-descriptor ingestion socket.
inline constexpr uint32_t kMaxFrameBytes = 1 << 20;

/// Writes one frame; retries on partial writes. Returns false on socket error.
bool write_frame(int fd, std::string_view payload);

/// Reads one frame. With a timeout, waits up to that many milliseconds for
/// the first byte (and between subsequent chunks). nullopt = EOF, timeout,
/// or framing error.
std::optional<std::string> read_frame(int fd, std::optional<int> timeout_ms = std::nullopt);

/// Blocking TCP connect to host:port, returns fd or -1.
int tcp_connect(const std::string& host, int port);

/// Listening socket bound to host (port 0 picks a free port); returns fd and
/// stores the bound port. -1 on failure.
int tcp_listen(const std::string& host, int port, int* bound_port);

}  // namespace cloop::util
