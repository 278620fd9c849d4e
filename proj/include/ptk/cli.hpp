#ifndef PTK_CLI_HPP
#define PTK_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace ptk {

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitSemantic = 2, kExitInconclusive = 3, kExitCounterexample = 4 };

// The ptk command line; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ptk

#endif
