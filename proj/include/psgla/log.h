#pragma once

#include <functional>
#include <string>

namespace psgla {

// Non-fatal diagnostics (eta capped, estimate above declared constant, ...).
// Default sink writes "warning: ..." to stderr.
void warn(const std::string& message);

using WarningSink = std::function<void(const std::string&)>;

// Replaces the sink; returns the previous one. Pass nullptr to restore stderr.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace psgla
