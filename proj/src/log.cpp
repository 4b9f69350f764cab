// SPDX-License-Identifier: Apache-2.0
#include "gaze/log.hpp"

#include <iostream>
#include <mutex>

namespace gaze {

namespace {
std::mutex g_sink_mutex;
LogSink g_sink; // empty -> stderr
} // namespace

void set_log_sink(LogSink sink) {
    std::lock_guard lock(g_sink_mutex);
    g_sink = std::move(sink);
}

void log(std::string_view message) {
    std::lock_guard lock(g_sink_mutex);
    if (g_sink) {
        g_sink(message);
    } else {
        std::cerr << message << '\n';
    }
}

} // namespace gaze
