#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "safewatch/error.hpp"

namespace safewatch::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDataIntegrity = 3,
  kNumeric = 4,
  kInternal = 5,
};

/// Exit status for a library error kind.
int exit_code(ErrorKind kind) noexcept;

/// Environment variable that overrides the default output directory when no
/// --out flag is given.
inline constexpr const char* kOutDirEnv = "SAFEWATCH_OUT";

/// Runs one subcommand. `args` excludes the program name. Failures print a
/// single line to `err`:
///   safewatch: error exit=<code> kind=<kind> module=<module>: <message>
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace safewatch::cli
