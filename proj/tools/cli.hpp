#pragma once

namespace formation {

/// Exit codes: 0 success, 1 configuration/usage error, 2 runtime abort.
int cli_main(int argc, char** argv);

}  // namespace formation
