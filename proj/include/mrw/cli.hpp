#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mrw::cli {

// Process exit codes; listed in `mrw --help`.
enum ExitCode : int {
    kOk = 0,
    kUsage = 2,          // unknown flag, malformed option value
    kInvalidConfig = 3,  // unparseable input, bad configuration
    kAnalysis = 4,       // a numerical operation rejected its input
    kIo = 5,             // input could not be opened or output could not be written
};

// Runs one subcommand. argv[0] is the program name. Successful output goes to
// `out`; on failure a one-line JSON error record is written to `err`.
int run_command(const std::vector<std::string>& argv, std::istream& in, std::ostream& out,
                std::ostream& err);

}  // namespace mrw::cli
