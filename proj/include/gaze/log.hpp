// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string_view>

namespace gaze {

// Diagnostics go through a process-wide sink (default: one line to stderr).
// Data artifacts never travel through this channel, so output files stay
// machine-composable and tests can capture every log line.
using LogSink = std::function<void(std::string_view)>;

void set_log_sink(LogSink sink); // empty sink restores the stderr default
void log(std::string_view message);

} // namespace gaze
