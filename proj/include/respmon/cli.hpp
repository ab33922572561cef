#pragma once

#include <iosfwd>

namespace respmon::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;      // usage or config error
inline constexpr int kIo = 2;         // file or socket failure
inline constexpr int kProtocol = 3;   // stream corrupt beyond resync

// Entry point for the `respmon` tool: simulate, stream, decode, analyze, power.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace respmon::cli
