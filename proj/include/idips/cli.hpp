#pragma once

namespace idips {

// Entry point of the `idips` tool. Exit status: 0 success, 1 domain error
// (bad policy, schema violation, solver failure), 2 usage error.
int run_cli(int argc, char** argv);

}  // namespace idips
