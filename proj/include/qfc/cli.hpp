#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qfc::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;       // operation error
inline constexpr int kUsageError = 2;    // bad flags, scenario or input data

// Entry point of the qfcsim tool. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Names accepted by `reproduce`.
std::vector<std::string> preset_names();

}  // namespace qfc::cli
