#pragma once

#include <string>
#include <vector>

#include "deal/diagnostics.hpp"

namespace deal::test {

// Collects warnings for the lifetime of the object instead of printing them.
class WarningCapture {
public:
    WarningCapture() {
        previous_ = set_warning_sink([this](const std::string& m) { messages.push_back(m); });
    }
    ~WarningCapture() { set_warning_sink(previous_); }
    WarningCapture(const WarningCapture&) = delete;
    WarningCapture& operator=(const WarningCapture&) = delete;

    std::vector<std::string> messages;

private:
    WarningSink previous_;
};

}  // namespace deal::test
