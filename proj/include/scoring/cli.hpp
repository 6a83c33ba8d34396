#pragma once

#include <iosfwd>

namespace scoring {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;

// Entry point for the `scoring` command: serve | score | batch | models {list,show,validate}.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scoring
