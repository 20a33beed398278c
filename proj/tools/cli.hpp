#pragma once

// Command-line front end. `dispatch` is the whole program minus process
// setup, so tests can drive it in-process.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fibrebend::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

/// `args` excludes the program name. Returns the process exit code.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Output directory used when `--out` is absent: $FIBREBEND_OUT, else "out".
std::filesystem::path default_output_dir();

}  // namespace fibrebend::cli
