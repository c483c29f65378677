#pragma once

namespace adaptgen {

// Entry point for the adaptgen command-line tool. Returns the process exit
// code: 0 on success, 1 on a runtime failure (with category on stderr), 2 on
// a usage error.
int run_cli(int argc, char** argv);

}  // namespace adaptgen
