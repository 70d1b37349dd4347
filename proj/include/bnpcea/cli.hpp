#pragma once

namespace bnpcea {

// Exit codes: 0 success, 1 invalid input or configuration, 2 numeric
// failure, 64 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitUsage = 64;

int cli_main(int argc, char** argv);

}  // namespace bnpcea
