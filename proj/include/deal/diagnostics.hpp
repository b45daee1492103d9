#pragma once

#include <functional>
#include <string>

namespace deal {

// Non-fatal conditions (out-of-range theory parameters, clipped budgets...)
// are routed through a process-wide sink. Default writes to stderr.
using WarningSink = std::function<void(const std::string&)>;

void warn(const std::string& message);

// Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace deal
