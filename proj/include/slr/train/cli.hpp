#pragma once

namespace slr {

/// Entry point of the `slr` tool. Returns 0 on success, 1 on a runtime
/// failure and 2 on a usage error.
int cli_main(int argc, char** argv);

} // namespace slr
