#pragma once

namespace nightspec {

// Parses and runs one full command line (design / simulate / evaluate /
// realize). Returns the process exit code: 0 on success, 2 for usage,
// config, or file format problems, 3 when the numerics fail.
int run_cli(int argc, char** argv);

}  // namespace nightspec
