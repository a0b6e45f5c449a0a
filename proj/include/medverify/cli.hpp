#pragma once

#include <string>
#include <vector>

namespace medverify::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Entry point of the `medverify` tool. Subcommands: train, verify, report,
/// gen, validate. Diagnostics go to stderr; the log level is read from
/// MEDVERIFY_LOG_LEVEL (trace, debug, info, warn, error, off).
int run(int argc, char** argv);
int run(std::vector<std::string> args);

}  // namespace medverify::cli
