#pragma once

// Command-line front end. dispatch() is the whole tool minus main(), so tests
// can drive it in-process.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace scottlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitBudget = 3;

inline constexpr const char* kToolVersion = "scottlab 1.0.0";
inline constexpr const char* kBudgetCeilingEnv = "SCOTTLAB_BUDGET_CEILING";

// args excludes the program name. The report goes to `out` unless --out is
// given; diagnostics go to `err`. --manifest writes a JSON run manifest that
// `replay` re-executes.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_hex(const std::string& data);

}  // namespace scottlab
