#pragma once

namespace cloudinv::cli {

// Parses argv, runs the selected subcommand, and returns the process exit
// status: 0 on success, 1 on validation/usage errors, 2 on runtime failures.
int parse_and_dispatch(int argc, const char* const* argv);

}  // namespace cloudinv::cli
