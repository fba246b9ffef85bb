#pragma once

#include <iosfwd>

namespace ghostmark::tools {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;  // bad input, usage, encoding, I/O
inline constexpr int kExitCapacity = 3;
inline constexpr int kExitTransport = 4;  // transport, auth, protocol, incomplete audit
inline constexpr int kExitCommitment = 5;
inline constexpr int kExitLocked = 6;

// Entry point of the ghostmark command; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ghostmark::tools
