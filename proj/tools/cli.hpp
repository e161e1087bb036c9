#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace optinet::cli {

enum ExitCode : int { ok = 0, usage = 2, data = 3, verification = 4 };

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace optinet::cli
