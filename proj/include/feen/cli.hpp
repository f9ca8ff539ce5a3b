#pragma once

namespace feen::cli {

// Full command-line surface, callable in-process.  Returns the process exit
// code: 0 success, 2 invalid arguments or inputs, 3 geometry failure,
// 4 eigensolver failure, 5 artifact hash mismatch, 6 non-finite training
// loss, 1 anything else.
int run(int argc, const char* const* argv);

}  // namespace feen::cli
