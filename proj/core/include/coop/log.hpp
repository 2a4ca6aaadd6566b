#pragma once

#include <string_view>

namespace coop {

// Warnings raised by validation (clamped entries, suspicious frequencies...).
// The default handler writes "warning: <msg>" to stderr.
using WarningHandler = void (*)(std::string_view);

WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace coop
