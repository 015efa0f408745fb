#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emofad::cli {

/// Runs the `emofad` command line. Exit codes: 0 success, 1 domain error
/// (one `ERROR <code>: <detail>` line on `err`), 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace emofad::cli
