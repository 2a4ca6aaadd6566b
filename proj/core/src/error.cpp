#include "coop/error.hpp"

#include <atomic>
#include <cstdio>

#include "coop/log.hpp"

namespace coop {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidMatrix: return "invalid-matrix";
    case ErrorKind::NotMetzler: return "not-metzler";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Reducible: return "reducible";
    case ErrorKind::AssumptionViolation: return "assumption-violation";
    case ErrorKind::IterationLimit: return "iteration-limit";
    case ErrorKind::ContractionFailure: return "contraction-failure";
    case ErrorKind::NumericalBlowup: return "numerical-blowup";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

namespace {

void default_handler(std::string_view message) {
  std::fprintf(stderr, "warning: %.*s\n", static_cast<int>(message.size()),
               message.data());
}

std::atomic<WarningHandler> g_handler{&default_handler};

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  return g_handler.exchange(handler ? handler : &default_handler);
}

void warn(std::string_view message) { g_handler.load()(message); }

}  // namespace coop
