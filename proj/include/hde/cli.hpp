#pragma once

#include <iosfwd>

namespace hde::cli {

/// Entry point of the `hde` tool. Returns the process exit code: 0 on
/// success, 2 for configuration errors, 3 for data errors, 4 for numeric
/// failures and 1 for anything else. Diagnostics go to `err`.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hde::cli
