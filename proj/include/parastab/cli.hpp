#pragma once

namespace parastab {

/// Command-line driver. Returns 0 on success, 1 on numeric failure, 2 on
/// configuration errors.
int run_cli(int argc, const char* const* argv);

} // namespace parastab
